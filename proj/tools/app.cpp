#include "app.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unistd.h>

#include "CLI11.hpp"
#include "divopt/errors.hpp"
#include "divopt/solver.hpp"
#include "divopt/verify.hpp"

namespace divopt::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSweepAxes = {"beta",    "a",        "mu_minus", "sigma_minus",
                                             "mu_plus", "sigma_plus", "q"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

template <class T>
T require(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing " + where + "." + key);
    T v{};
    read(j, key, v, where);
    return v;
}

std::string fmt17(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json constants_json(const DerivedConstants& c) {
    return {{"theta1_plus", c.theta1_plus}, {"theta2_plus", c.theta2_plus},
            {"theta1_minus", c.theta1_minus}, {"theta2_minus", c.theta2_minus},
            {"c_minus", c.c_minus},         {"c_plus", c.c_plus},
            {"Theta", c.Theta},             {"x0", optional_json(c.x0)},
            {"a1", optional_json(c.a1)},    {"a2", optional_json(c.a2)},
            {"a3", optional_json(c.a3)},    {"a4", optional_json(c.a4)},
            {"a5", optional_json(c.a5)},    {"a6", optional_json(c.a6)},
            {"a7", optional_json(c.a7)},    {"x1", optional_json(c.x1)},
            {"x2", optional_json(c.x2)},    {"x3", optional_json(c.x3)},
            {"x4", optional_json(c.x4)}};
}

json report_json(const VerificationReport& r) {
    return {{"first_order", r.first_order},
            {"condition_a", r.condition_a},
            {"condition_b", r.condition_b},
            {"condition_b_residual", r.condition_b_residual},
            {"condition_c", r.condition_c},
            {"g2_at_a_plus", r.g2_at_a_plus},
            {"slope_ratio_ok", r.slope_ratio_ok},
            {"interior_residual", r.interior_residual},
            {"interior_tolerance", r.interior_tolerance},
            {"qvi_max_residual", r.qvi_max_residual},
            {"increment_min_slack", r.increment_min_slack},
            {"value_at_z2", r.value_at_z2},
            {"verdict", to_string(r.verdict)},
            {"reason", r.reason}};
}

json estimate_json(const MCEstimate& e) {
    return {{"mean", e.mean},       {"std_error", e.std_error}, {"ci95_lo", e.ci95_lo},
            {"ci95_hi", e.ci95_hi}, {"n_paths", e.n_paths},     {"truncation_bias_bound", e.truncation_bias_bound}};
}

std::string case_line(const CaseLabel& l) {
    return l.sub.empty() ? to_string(l.regime) : to_string(l.regime) + " / " + l.sub;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    bool strict = false;
    std::optional<std::uint64_t> seed;
    std::optional<double> beta, dt, horizon, from, to, x0;
    std::optional<long> n_paths;
    std::optional<int> steps;
    std::optional<std::string> axis;
    bool store_paths = false;
};

// Command-line values take precedence over the config file.
RunConfig resolve(const Options& o) {
    RunConfig c = load_config(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (o.beta) c.beta = *o.beta;
    if (o.dt) c.sim.dt = *o.dt;
    if (o.horizon) c.sim.horizon = *o.horizon;
    if (o.n_paths) c.sim.n_paths = *o.n_paths;
    if (o.x0) c.x0 = *o.x0;
    if (o.store_paths) c.sim.store_paths = true;
    if (o.axis) c.sweep.axis = *o.axis;
    if (o.steps) c.sweep.steps = *o.steps;
    if (o.from) c.sweep.from = *o.from;
    if (o.to) c.sweep.to = *o.to;
    c.sim.seed = c.seed;
    return c;
}

std::string out_path(const Options& o, const std::string& name) {
    fs::create_directories(o.out_dir);
    return (fs::path(o.out_dir) / name).string();
}

int cmd_solve(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve(o);
    ScaleContext ctx(cfg.params());
    const auto sol = solve_barriers(ctx);
    json j{{"command", "solve"}, {"config", config_to_json(cfg)}, {"case", to_string(sol.label)},
           {"constants", constants_json(sol.constants)}, {"degenerate", sol.degenerate}};
    bool proven = true;
    out << "case: " << to_string(sol.label) << "\n";
    for (const auto& pr : sol.pairs) {
        const auto rep = check_conditions(ValueFunction(ctx, pr));
        proven = proven && rep.verdict == Verdict::OptimalProven;
        const double z = zeta(ctx, pr.z1, pr.z2);
        j["pairs"].push_back({{"z1", pr.z1}, {"z2", pr.z2}, {"zeta", z}, {"verification", report_json(rep)}});
        out << "z1 = " << fmt17(pr.z1) << ", z2 = " << fmt17(pr.z2) << ", zeta = " << fmt17(z) << "\n"
            << "  verdict: " << to_string(rep.verdict) << " (" << rep.reason << ")\n";
    }
    j["zeta_star"] = zeta(ctx, sol.pairs.front().z1, sol.pairs.front().z2);
    for (const auto& c : sol.candidates)
        j["candidates"].push_back({{"family", c.family}, {"z1", c.pair.z1}, {"z2", c.pair.z2}});
    j["trace"] = sol.trace;
    const auto path = out_path(o, "solution.json");
    write_atomic(path, j.dump(2) + "\n");
    out << "wrote " << path << "\n";
    return o.strict && !proven ? kNotProven : kOk;
}

int cmd_classify(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve(o);
    const auto p = cfg.params();
    out << case_line(classify_case(p, derive_constants(p))) << "\n";
    return kOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve(o);
    ScaleContext ctx(cfg.params());
    std::vector<BarrierPair> pairs;
    if (cfg.verify.pair) pairs = {*cfg.verify.pair};
    else pairs = solve_barriers(ctx).pairs;
    std::string text;
    bool proven = true;
    for (size_t i = 0; i < pairs.size(); ++i) {
        const auto rep = check_conditions(ValueFunction(ctx, pairs[i]));
        proven = proven && rep.verdict == Verdict::OptimalProven;
        text += (i ? "\n" : "") + to_key_value(rep);
    }
    const auto path = out_path(o, "verify.txt");
    write_atomic(path, text);
    out << text << "wrote " << path << "\n";
    return o.strict && !proven ? kNotProven : kOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    RunConfig cfg = resolve(o);
    const auto p = cfg.params();
    ScaleContext ctx(p);
    const auto pair = solve_barriers(ctx).pairs.front();
    const double x0 = cfg.x0.value_or(0.5 * (pair.z1 + pair.z2));
    cfg.x0 = x0;
    cfg.sim.horizon = resolved_horizon(cfg.sim, p.q());
    const auto est = estimate_value_mc(p, pair, cfg.sim, x0);
    const double analytic = ValueFunction(ctx, pair)(x0);
    json j{{"command", "simulate"},
           {"config", config_to_json(cfg)},
           {"pair", {{"z1", pair.z1}, {"z2", pair.z2}}},
           {"x0", x0},
           {"analytic_value", analytic},
           {"estimate", estimate_json(est)}};
    if (cfg.sim.store_paths) {
        std::ostringstream csv;
        write_paths_csv(csv, simulate_controlled(p, pair, cfg.sim, x0), p.a());
        const auto cpath = out_path(o, "paths.csv");
        write_atomic(cpath, csv.str());
        j["paths_csv"] = "paths.csv";
        out << "wrote " << cpath << "\n";
    }
    const auto path = out_path(o, "estimate.json");
    write_atomic(path, j.dump(2) + "\n");
    out << "mean = " << fmt17(est.mean) << " +- " << fmt17(1.96 * est.std_error) << " (analytic "
        << fmt17(analytic) << ")\nwrote " << path << "\n";
    return kOk;
}

void set_axis(RunConfig& c, const std::string& axis, double v) {
    if (axis == "beta") c.beta = v;
    else if (axis == "a") c.a = v;
    else if (axis == "mu_minus") c.minus.mu = v;
    else if (axis == "sigma_minus") c.minus.sigma = v;
    else if (axis == "mu_plus") c.plus.mu = v;
    else if (axis == "sigma_plus") c.plus.sigma = v;
    else if (axis == "q") c.q = v;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve(o);
    const auto& s = cfg.sweep;
    if (std::find(kSweepAxes.begin(), kSweepAxes.end(), s.axis) == kSweepAxes.end())
        throw ConfigError("sweep axis must be one of beta, a, mu_minus, sigma_minus, mu_plus, sigma_plus, q");
    if (s.steps < 1) throw ConfigError("sweep steps must be at least 1");
    if (!std::isfinite(s.from) || !std::isfinite(s.to)) throw ConfigError("sweep range must be finite");
    std::ostringstream csv;
    csv << "axis,value,branch,z1,z2,case,condition_a,condition_b,condition_c,verdict,zeta,error\n";
    int failures = 0;
    for (int i = 0; i < s.steps; ++i) {
        const double v = s.steps == 1 ? s.from : s.from + (s.to - s.from) * i / (s.steps - 1);
        RunConfig row = cfg;
        set_axis(row, s.axis, v);
        const std::string head = s.axis + "," + fmt17(v) + ",";
        try {
            ScaleContext ctx(row.params());
            const auto sol = solve_barriers(ctx);
            for (size_t b = 0; b < sol.pairs.size(); ++b) {
                const auto& pr = sol.pairs[b];
                const auto rep = check_conditions(ValueFunction(ctx, pr));
                auto flag = [](bool f) { return f ? "1" : "0"; };
                csv << head << b << ',' << fmt17(pr.z1) << ',' << fmt17(pr.z2) << ',' << to_string(sol.label) << ','
                    << flag(rep.condition_a) << ',' << flag(rep.condition_b) << ',' << flag(rep.condition_c) << ','
                    << to_string(rep.verdict) << ',' << fmt17(zeta(ctx, pr.z1, pr.z2)) << ",\n";
            }
        } catch (const Error& e) {
            ++failures;
            csv << head << "0,,,,,,,,," << csv_field(e.what()) << "\n";
        }
    }
    const auto path = out_path(o, "sweep.csv");
    write_atomic(path, csv.str());
    out << s.steps << " sweep points over " << s.axis << ", " << failures << " failed\nwrote " << path << "\n";
    return kOk;
}

int cmd_oracle(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve(o);
    ScaleContext ctx(cfg.params());
    const auto sol = solve_barriers(ctx);
    const auto res = grid_maximize_zeta(ctx, cfg.grid);
    const auto cmp = compare_solver_oracle(ctx, sol, res);
    RunConfig resolved = cfg;
    resolved.grid = res.grid;
    json j{{"command", "oracle"},
           {"config", config_to_json(resolved)},
           {"zeta_solver", cmp.zeta_solver},
           {"zeta_oracle", cmp.zeta_oracle},
           {"value_ok", cmp.value_ok},
           {"argmax_ok", cmp.argmax_ok},
           {"worst_offset_spacings", cmp.worst_offset},
           {"spacing_z1", res.spacing_z1},
           {"spacing_z2", res.spacing_z2},
           {"evaluations", res.evaluations}};
    for (const auto& pr : sol.pairs) j["solver_pairs"].push_back({{"z1", pr.z1}, {"z2", pr.z2}});
    for (const auto& a : res.argmaxes)
        j["oracle_argmaxes"].push_back({{"z1", a.pair.z1}, {"z2", a.pair.z2}, {"zeta", a.zeta}});
    const auto path = out_path(o, "oracle.json");
    write_atomic(path, j.dump(2) + "\n");
    const bool pass = cmp.value_ok && cmp.argmax_ok;
    out << "oracle " << (pass ? "PASS" : "FAIL") << ": zeta solver " << fmt17(cmp.zeta_solver) << ", oracle "
        << fmt17(cmp.zeta_oracle) << ", argmax offset " << cmp.worst_offset << " spacings; report " << path << "\n";
    return o.strict && !pass ? kNotProven : kOk;
}

void print_error(std::ostream& err, const char* kind, const std::string& msg) {
    err << json{{"error", kind}, {"message", msg}}.dump() << "\n";
}

}  // namespace

RunConfig config_from_json(const json& j) {
    check_keys(j, {"model", "seed", "simulate", "oracle", "sweep", "verify"}, "config");
    if (!j.contains("model")) throw ConfigError("missing model section");
    RunConfig c;
    const auto& m = j.at("model");
    check_keys(m, {"mu_plus", "sigma_plus", "mu_minus", "sigma_minus", "a", "q", "beta"}, "model");
    c.plus = {require<double>(m, "mu_plus", "model"), require<double>(m, "sigma_plus", "model")};
    c.minus = {require<double>(m, "mu_minus", "model"), require<double>(m, "sigma_minus", "model")};
    c.a = require<double>(m, "a", "model");
    c.q = require<double>(m, "q", "model");
    c.beta = require<double>(m, "beta", "model");
    read(j, "seed", c.seed, "config");
    c.sim.seed = c.seed;
    if (j.contains("simulate")) {
        const auto& s = j.at("simulate");
        check_keys(s, {"dt", "horizon", "n_paths", "antithetic", "store_paths", "x0"}, "simulate");
        read(s, "dt", c.sim.dt, "simulate");
        read(s, "horizon", c.sim.horizon, "simulate");
        read(s, "n_paths", c.sim.n_paths, "simulate");
        read(s, "antithetic", c.sim.antithetic, "simulate");
        read(s, "store_paths", c.sim.store_paths, "simulate");
        if (s.contains("x0")) c.x0 = require<double>(s, "x0", "simulate");
    }
    if (j.contains("oracle")) {
        const auto& g = j.at("oracle");
        check_keys(g, {"z1_lo", "z1_hi", "z2_lo", "z2_hi", "n1", "n2", "refine_rounds", "zoom", "top_k", "tie_rel"},
                   "oracle");
        read(g, "z1_lo", c.grid.z1_lo, "oracle");
        read(g, "z1_hi", c.grid.z1_hi, "oracle");
        read(g, "z2_lo", c.grid.z2_lo, "oracle");
        read(g, "z2_hi", c.grid.z2_hi, "oracle");
        read(g, "n1", c.grid.n1, "oracle");
        read(g, "n2", c.grid.n2, "oracle");
        read(g, "refine_rounds", c.grid.refine_rounds, "oracle");
        read(g, "zoom", c.grid.zoom, "oracle");
        read(g, "top_k", c.grid.top_k, "oracle");
        read(g, "tie_rel", c.grid.tie_rel, "oracle");
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        check_keys(s, {"axis", "from", "to", "steps"}, "sweep");
        read(s, "axis", c.sweep.axis, "sweep");
        read(s, "from", c.sweep.from, "sweep");
        read(s, "to", c.sweep.to, "sweep");
        read(s, "steps", c.sweep.steps, "sweep");
    }
    if (j.contains("verify")) {
        const auto& v = j.at("verify");
        check_keys(v, {"z1", "z2"}, "verify");
        if (v.contains("z1") || v.contains("z2"))
            c.verify.pair = BarrierPair{require<double>(v, "z1", "verify"), require<double>(v, "z2", "verify")};
    }
    return c;
}

json config_to_json(const RunConfig& c) {
    json j{{"model",
            {{"mu_plus", c.plus.mu},
             {"sigma_plus", c.plus.sigma},
             {"mu_minus", c.minus.mu},
             {"sigma_minus", c.minus.sigma},
             {"a", c.a},
             {"q", c.q},
             {"beta", c.beta}}},
           {"seed", c.seed},
           {"simulate",
            {{"dt", c.sim.dt},
             {"horizon", c.sim.horizon},
             {"n_paths", c.sim.n_paths},
             {"antithetic", c.sim.antithetic},
             {"store_paths", c.sim.store_paths}}},
           {"oracle",
            {{"z1_lo", c.grid.z1_lo},
             {"z1_hi", c.grid.z1_hi},
             {"z2_lo", c.grid.z2_lo},
             {"z2_hi", c.grid.z2_hi},
             {"n1", c.grid.n1},
             {"n2", c.grid.n2},
             {"refine_rounds", c.grid.refine_rounds},
             {"zoom", c.grid.zoom},
             {"top_k", c.grid.top_k},
             {"tie_rel", c.grid.tie_rel}}},
           {"sweep", {{"axis", c.sweep.axis}, {"from", c.sweep.from}, {"to", c.sweep.to}, {"steps", c.sweep.steps}}},
           {"verify", json::object()}};
    if (c.x0) j["simulate"]["x0"] = *c.x0;
    if (c.verify.pair) j["verify"] = {{"z1", c.verify.pair->z1}, {"z2", c.verify.pair->z2}};
    return j;
}

RunConfig load_config(const std::string& path) {
    if (path.empty()) throw ConfigError("--config is required");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return config_from_json(j);
}

void write_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f << contents;
        f.flush();
        if (!f) {
            std::remove(tmp.c_str());
            throw Error("failed to write " + tmp);
        }
    }
    fs::rename(tmp, path);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-barrier dividend strategies for a threshold-switching surplus"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", o.out_dir, "Output directory (default: current directory)");
    app.add_option("--seed", o.seed, "Random seed");
    app.add_flag("--strict", o.strict, "Exit with code 4 unless every pair is proven optimal");
    app.add_option("--beta", o.beta, "Override the dividend cost");
    app.add_option("--axis", o.axis, "Sweep axis");
    app.add_option("--steps", o.steps, "Number of sweep points");
    app.add_option("--from", o.from, "Sweep start");
    app.add_option("--to", o.to, "Sweep end");
    app.add_option("--n-paths", o.n_paths, "Monte-Carlo paths");
    app.add_option("--dt", o.dt, "Time step");
    app.add_option("--horizon", o.horizon, "Simulation horizon");
    app.add_option("--x0", o.x0, "Initial surplus for simulate");
    app.add_flag("--store-paths", o.store_paths, "Write every simulated path to paths.csv");

    using Cmd = int (*)(const Options&, std::ostream&);
    const std::vector<std::tuple<const char*, const char*, Cmd>> commands = {
        {"solve", "Optimal barriers, constants and verification", cmd_solve},
        {"classify", "Print the case label", cmd_classify},
        {"verify", "Check optimality conditions for a pair", cmd_verify},
        {"simulate", "Monte-Carlo value of the optimal strategy", cmd_simulate},
        {"sweep", "Barriers along one parameter axis", cmd_sweep},
        {"oracle", "Compare the solver with a brute-force lattice search", cmd_oracle},
    };
    for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        print_error(err, "usage", e.what());
        return kConfigError;
    }
    try {
        for (const auto& [name, help, fn] : commands)
            if (app.got_subcommand(name)) return fn(o, out);
    } catch (const ConfigError& e) {
        print_error(err, "config", e.what());
        return kConfigError;
    } catch (const NumericalError& e) {
        print_error(err, "numerical", e.what());
        return kNumericalError;
    } catch (const DomainError& e) {
        print_error(err, "numerical", e.what());
        return kNumericalError;
    } catch (const std::exception& e) {
        print_error(err, "io", e.what());
        return 1;
    }
    return kOk;
}

}  // namespace divopt::cli
