#include <filesystem>
#include <fstream>
#include <sstream>

#include "app.hpp"
#include "doctest.h"
#include "divopt/errors.hpp"

using namespace divopt;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

class Workspace {
public:
    Workspace() {
        dir_ = fs::temp_directory_path() / ("divopt_cli_" + std::to_string(counter_++) + "_" +
                                            std::to_string(std::hash<std::string>{}(fs::current_path().string())));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Workspace() { fs::remove_all(dir_); }

    std::string file(const std::string& name) const { return (dir_ / name).string(); }

    std::string write_config(const json& j, const std::string& name = "run.json") const {
        std::ofstream(file(name)) << j.dump(2);
        return file(name);
    }

    Run run(std::vector<std::string> args) const {
        args.insert(args.begin(), "divopt");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return {code, out.str(), err.str()};
    }

private:
    fs::path dir_;
    static inline int counter_ = 0;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

json model(double mup, double sp, double mum, double sm, double a, double q, double beta) {
    return {{"mu_plus", mup}, {"sigma_plus", sp}, {"mu_minus", mum}, {"sigma_minus", sm},
            {"a", a},         {"q", q},           {"beta", beta}};
}

json startup_phase() { return {{"model", model(0.1, 0.1, 0.5, 0.5, 1.0, 0.05, 0.5)}, {"seed", 11}}; }

}  // namespace

TEST_CASE("config round-trips through json") {
    json j = startup_phase();
    j["simulate"] = {{"dt", 0.002}, {"horizon", 12.5}, {"n_paths", 300}, {"antithetic", false}, {"x0", 0.75}};
    j["oracle"] = {{"n1", 50}, {"z2_hi", 4.0}};
    j["sweep"] = {{"axis", "sigma_minus"}, {"from", 0.3}, {"to", 0.9}, {"steps", 7}};
    j["verify"] = {{"z1", 0.4}, {"z2", 2.0}};
    const auto c = cli::config_from_json(j);
    CHECK(c.sim.dt == 0.002);
    CHECK(c.sim.n_paths == 300);
    CHECK_FALSE(c.sim.antithetic);
    CHECK(c.sim.seed == 11);
    CHECK(*c.x0 == 0.75);
    CHECK(c.grid.n1 == 50);
    CHECK(c.grid.n2 == 400);
    CHECK(c.sweep.axis == "sigma_minus");
    CHECK(c.verify.pair->z2 == 2.0);
    const json once = cli::config_to_json(c);
    CHECK(cli::config_to_json(cli::config_from_json(once)) == once);
}

TEST_CASE("bad configs are rejected") {
    auto bad = [](json j) { CHECK_THROWS_AS(cli::config_from_json(j), ConfigError); };
    json j = startup_phase();
    j["extra"] = 1;
    bad(j);
    j = startup_phase();
    j["model"]["mu"] = 0.1;
    bad(j);
    j = startup_phase();
    j["simulate"] = {{"paths", 10}};
    bad(j);
    j = startup_phase();
    j["model"]["a"] = "one";
    bad(j);
    j = startup_phase();
    j["model"].erase("q");
    bad(j);
    bad(json{{"seed", 1}});
    j = startup_phase();
    j["verify"] = {{"z1", 0.3}};
    bad(j);
}

TEST_CASE("classify prints the case label") {
    Workspace w;
    auto r = w.run({"classify", "--config", w.write_config({{"model", model(0.5, 0.5, 1.0, 0.5, 8.0, 0.05, 1.0)}})});
    CHECK(r.code == 0);
    CHECK(r.out == "both-positive / iii\n");
    r = w.run({"classify", "--config", w.write_config({{"model", model(-0.1, 0.5, -0.2, 0.5, 1.0, 0.05, 1.0)}})});
    CHECK(r.out == "both-nonpositive\n");
}

TEST_CASE("solve writes the barriers and the resolved config") {
    Workspace w;
    auto r = w.run({"solve", "--config", w.write_config(startup_phase()), "--out", w.file("out")});
    REQUIRE(r.code == 0);
    const auto j = json::parse(slurp(w.file("out/solution.json")));
    CHECK(j["case"] == "both-positive/i");
    CHECK(j["pairs"][0]["z1"].get<double>() == doctest::Approx(0.4277).epsilon(1e-3));
    CHECK(j["pairs"][0]["z2"].get<double>() == doctest::Approx(1.9059).epsilon(1e-3));
    CHECK(j["pairs"][0]["verification"]["verdict"] == "optimal-proven");
    CHECK(j["config"]["model"]["beta"] == 0.5);
    CHECK(j["config"]["seed"] == 11);
    CHECK(j["constants"]["theta2_plus"].is_number());
    CHECK(j["constants"].contains("x0"));
    CHECK(r.out.find("case: both-positive/i") == 0);

    // --beta overrides the file.
    r = w.run({"solve", "--config", w.file("run.json"), "--out", w.file("out2"), "--beta", "0.25"});
    CHECK(json::parse(slurp(w.file("out2/solution.json")))["config"]["model"]["beta"] == 0.25);
}

TEST_CASE("nonpositive drifts pay everything at the upper barrier") {
    Workspace w;
    auto r = w.run({"solve", "--config", w.write_config({{"model", model(-0.1, 0.5, 0.0, 0.7, 1.0, 0.1, 0.3)}}), "--out",
                    w.file("out")});
    REQUIRE(r.code == 0);
    CHECK(json::parse(slurp(w.file("out/solution.json")))["pairs"][0]["z1"] == 0.0);
}

TEST_CASE("malformed config fails cleanly") {
    Workspace w;
    std::ofstream(w.file("broken.json")) << "{\"model\": {\"a\": 1,";
    auto r = w.run({"solve", "--config", w.file("broken.json"), "--out", w.file("out")});
    CHECK(r.code == 2);
    CHECK(json::parse(r.err)["error"] == "config");
    CHECK_FALSE(fs::exists(w.file("out")));

    r = w.run({"solve", "--config", w.write_config({{"model", model(0.1, -1.0, 0.5, 0.5, 1.0, 0.05, 0.5)}}), "--out",
               w.file("out")});
    CHECK(r.code == 2);
    CHECK_FALSE(fs::exists(w.file("out")));

    r = w.run({"solve", "--no-such-flag"});
    CHECK(r.code == 2);
    r = w.run({"solve"});
    CHECK(r.code == 2);
}

TEST_CASE("verify names the satisfied condition") {
    Workspace w;
    auto r = w.run({"verify", "--config", w.write_config(startup_phase()), "--out", w.file("out")});
    CHECK(r.code == 0);
    CHECK(r.out.find("verdict=optimal-proven\n") != std::string::npos);
    CHECK(r.out.find("reason=conditions: a") != std::string::npos);
    CHECK(slurp(w.file("out/verify.txt")).find("condition_a=true") != std::string::npos);

    json j = startup_phase();
    j["verify"] = {{"z1", 0.0}, {"z2", 3.0}};
    r = w.run({"verify", "--config", w.write_config(j), "--out", w.file("out")});
    CHECK(r.out.find("first_order=false") != std::string::npos);
}

TEST_CASE("strict solve flags unproven pairs") {
    Workspace w;
    const auto cfg = w.write_config({{"model", model(0.801421, 0.961487, -0.485684, 1.00689, 1.98857, 0.208723, 0.512793)}});
    CHECK(w.run({"solve", "--config", cfg, "--out", w.file("out")}).code == 0);
    auto r = w.run({"solve", "--config", cfg, "--out", w.file("out"), "--strict"});
    CHECK(r.code == 4);
    CHECK(r.out.find("not-proven") != std::string::npos);
}

TEST_CASE("simulate is reproducible and resets to the lower barrier") {
    Workspace w;
    json j = startup_phase();
    j["simulate"] = {{"horizon", 10.0}, {"n_paths", 4}, {"store_paths", true}};
    const auto cfg = w.write_config(j);
    REQUIRE(w.run({"simulate", "--config", cfg, "--out", w.file("a")}).code == 0);
    REQUIRE(w.run({"simulate", "--config", cfg, "--out", w.file("b")}).code == 0);
    CHECK(slurp(w.file("a/paths.csv")) == slurp(w.file("b/paths.csv")));
    CHECK(slurp(w.file("a/estimate.json")) == slurp(w.file("b/estimate.json")));

    const auto est = json::parse(slurp(w.file("a/estimate.json")));
    CHECK(est["config"]["simulate"]["horizon"] == 10.0);
    const double z1 = est["pair"]["z1"];
    std::istringstream csv(slurp(w.file("a/paths.csv")));
    std::string line;
    std::getline(csv, line);
    int impulses = 0;
    while (std::getline(csv, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        REQUIRE(f.size() == 5);
        if (std::stod(f[3]) > 0.0) {
            ++impulses;
            CHECK(std::stod(f[2]) == z1);
        }
    }
    CHECK(impulses > 0);

    REQUIRE(w.run({"simulate", "--config", cfg, "--out", w.file("c"), "--seed", "12"}).code == 0);
    CHECK(slurp(w.file("c/paths.csv")) != slurp(w.file("a/paths.csv")));
}

TEST_CASE("simulate without stored paths writes only the estimate") {
    Workspace w;
    json j = startup_phase();
    j["simulate"] = {{"horizon", 5.0}, {"n_paths", 200}};
    auto r = w.run({"simulate", "--config", w.write_config(j), "--out", w.file("out"), "--n-paths", "100"});
    CHECK(r.code == 0);
    CHECK(fs::exists(w.file("out/estimate.json")));
    CHECK_FALSE(fs::exists(w.file("out/paths.csv")));
    CHECK(json::parse(slurp(w.file("out/estimate.json")))["estimate"]["n_paths"] == 100);
}

TEST_CASE("sweep rows and per-row errors") {
    Workspace w;
    json j = startup_phase();
    j["sweep"] = {{"axis", "beta"}, {"from", -0.2}, {"to", 1.0}, {"steps", 7}};
    auto r = w.run({"sweep", "--config", w.write_config(j), "--out", w.file("out")});
    REQUIRE(r.code == 0);
    std::istringstream csv(slurp(w.file("out/sweep.csv")));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "axis,value,branch,z1,z2,case,condition_a,condition_b,condition_c,verdict,zeta,error");
    int rows = 0, errors = 0;
    while (std::getline(csv, line)) {
        ++rows;
        if (line.back() != ',') ++errors;
    }
    CHECK(rows == 7);
    CHECK(errors == 2);  // beta = -0.2 and beta = 0

    r = w.run({"sweep", "--config", w.file("run.json"), "--out", w.file("out"), "--axis", "gamma"});
    CHECK(r.code == 2);
}

TEST_CASE("oracle prints a pass line and the report path") {
    Workspace w;
    json j = startup_phase();
    j["oracle"] = {{"n1", 200}, {"n2", 200}};
    auto r = w.run({"oracle", "--config", w.write_config(j), "--out", w.file("out")});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("oracle PASS", 0) == 0);
    CHECK(r.out.find(w.file("out/oracle.json")) != std::string::npos);
    CHECK(json::parse(slurp(w.file("out/oracle.json")))["config"]["oracle"]["n1"] == 200);
}

TEST_CASE("atomic write leaves no temporary file") {
    Workspace w;
    cli::write_atomic(w.file("x.txt"), "one");
    cli::write_atomic(w.file("x.txt"), "two");
    CHECK(slurp(w.file("x.txt")) == "two");
    int n = 0;
    for (const auto& e : fs::directory_iterator(fs::path(w.file("x.txt")).parent_path())) n += e.is_regular_file();
    CHECK(n == 1);
}
