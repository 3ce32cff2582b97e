#include "divopt/sim.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <cmath>
#include <iomanip>
#include <random>

#include "divopt/errors.hpp"
#include "divopt/scale.hpp"

namespace divopt {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{splitmix64(seed), splitmix64(seed ^ splitmix64(index + 1))};
    return std::mt19937_64(seq);
}

struct Kahan {
    double sum = 0.0, c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

// Sample mean and standard error of independent observations fed one by one.
struct Moments {
    Kahan s, s2;
    long n = 0;
    void add(double v) {
        s.add(v);
        s2.add(v * v);
        ++n;
    }
    MCEstimate finish(long n_paths, double bias) const {
        MCEstimate e;
        e.n_paths = n_paths;
        e.mean = n ? s.sum / n : 0.0;
        const double var = n > 1 ? std::max(0.0, (s2.sum - n * e.mean * e.mean) / (n - 1)) : 0.0;
        e.std_error = n ? std::sqrt(var / n) : 0.0;
        e.ci95_lo = e.mean - 1.96 * e.std_error;
        e.ci95_hi = e.mean + 1.96 * e.std_error;
        e.truncation_bias_bound = bias;
        return e;
    }
};

struct Stepper {
    const ModelParams& p;
    double dt, sqdt;
    double drift(double x) const { return p.mu(x) * dt; }
    double vol(double x) const { return p.sigma(x) * sqdt; }
};

// State of one controlled path while it is being advanced.
struct Controlled {
    double x;
    bool alive = true;
    Kahan reward;
    PathRecord* rec = nullptr;
};

void pay_if_due(Controlled& s, double t, BarrierPair pair, double q, double beta) {
    if (s.x < pair.z2) return;
    const double amount = s.x - pair.z1;
    s.reward.add(std::exp(-q * t) * (amount - beta));
    if (s.rec) s.rec->dividends.emplace_back(t, amount);
    s.x = pair.z1;
}

void record(Controlled& s, double t) {
    if (!s.rec) return;
    s.rec->times.push_back(t);
    s.rec->surplus.push_back(s.x);
}

// Advances one or two (antithetic) controlled paths to ruin or horizon.
void run_controlled(const ModelParams& p, BarrierPair pair, const SimConfig& cfg, double x0,
                    std::uint64_t stream, Controlled* paths, int n) {
    auto rng = substream(cfg.seed, stream);
    boost::random::normal_distribution<double> normal;
    const Stepper st{p, cfg.dt, std::sqrt(cfg.dt)};
    const double q = p.q(), beta = p.beta();
    const long steps = static_cast<long>(std::floor(resolved_horizon(cfg, q) / cfg.dt + 1e-9));
    for (int i = 0; i < n; ++i) {
        paths[i].x = x0;
        record(paths[i], 0.0);
        pay_if_due(paths[i], 0.0, pair, q, beta);
    }
    int alive = n;
    for (long k = 1; k <= steps && alive > 0; ++k) {
        const double z = normal(rng);
        const double t = k * cfg.dt;
        for (int i = 0; i < n; ++i) {
            Controlled& s = paths[i];
            if (!s.alive) continue;
            const double dw = i == 0 ? z : -z;
            s.x += st.drift(s.x) + st.vol(s.x) * dw;
            record(s, t);
            if (s.x < 0.0) {
                s.alive = false;
                --alive;
                if (s.rec) s.rec->ruin_time = t;
                continue;
            }
            pay_if_due(s, t, pair, q, beta);
        }
    }
}

void check_pair(const ModelParams& p, BarrierPair pair, double x0) {
    if (!(pair.z1 >= 0.0 && pair.z2 - pair.z1 >= p.beta()))
        throw ConfigError("barrier pair must satisfy 0 <= z1 and z2 - z1 >= beta");
    if (!(x0 >= 0.0)) throw ConfigError("initial surplus must be nonnegative");
}

}  // namespace

double resolved_horizon(const SimConfig& cfg, double q) {
    return cfg.horizon > 0.0 ? cfg.horizon : std::max(20.0 / q, 50.0);
}

void validate(const SimConfig& cfg, double q) {
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(resolved_horizon(cfg, q) >= cfg.dt)) throw ConfigError("horizon must be at least dt");
    if (cfg.n_paths < 1) throw ConfigError("n_paths must be at least 1");
}

void simulate_controlled(const ModelParams& p, BarrierPair pair, const SimConfig& cfg, double x0,
                         const std::function<void(const PathRecord&)>& sink) {
    validate(cfg, p.q());
    check_pair(p, pair, x0);
    const int width = cfg.antithetic ? 2 : 1;
    for (long first = 0; first < cfg.n_paths; first += width) {
        const int n = static_cast<int>(std::min<long>(width, cfg.n_paths - first));
        PathRecord recs[2];
        Controlled paths[2];
        for (int i = 0; i < n; ++i) {
            recs[i].path_id = static_cast<std::uint64_t>(first + i);
            recs[i].reset_level = pair.z1;
            paths[i].rec = &recs[i];
        }
        run_controlled(p, pair, cfg, x0, static_cast<std::uint64_t>(first / width), paths, n);
        for (int i = 0; i < n; ++i) sink(recs[i]);
    }
}

std::vector<PathRecord> simulate_controlled(const ModelParams& p, BarrierPair pair, const SimConfig& cfg,
                                            double x0) {
    std::vector<PathRecord> out;
    simulate_controlled(p, pair, cfg, x0, [&](const PathRecord& r) { out.push_back(r); });
    return out;
}

MCEstimate estimate_value_mc(const ModelParams& p, BarrierPair pair, const SimConfig& cfg, double x0) {
    validate(cfg, p.q());
    check_pair(p, pair, x0);
    const int width = cfg.antithetic ? 2 : 1;
    Moments m;
    for (long first = 0; first < cfg.n_paths; first += width) {
        const int n = static_cast<int>(std::min<long>(width, cfg.n_paths - first));
        Controlled paths[2];
        run_controlled(p, pair, cfg, x0, static_cast<std::uint64_t>(first / width), paths, n);
        // An antithetic pair is one observation.
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += paths[i].reward.sum;
        m.add(v / n);
    }
    const double bias = std::exp(-p.q() * resolved_horizon(cfg, p.q())) * value_upper_bound(p, pair.z2);
    return m.finish(cfg.n_paths, bias);
}

ExitEstimate estimate_exit_mc(const ModelParams& p, const SimConfig& cfg, double x, double y, double z) {
    validate(cfg, p.q());
    if (!(y <= x && x <= z && y < z)) throw DomainError("exit estimate requires y <= x <= z and y < z");
    const double q = p.q();
    const double horizon = resolved_horizon(cfg, q);
    const double bias = std::exp(-q * horizon);
    Moments down, up;
    if (x == y || x == z) {
        const double d = x == y ? 1.0 : 0.0;
        for (long i = 0; i < cfg.n_paths; ++i) {
            down.add(d);
            up.add(1.0 - d);
        }
        return {down.finish(cfg.n_paths, 0.0), up.finish(cfg.n_paths, 0.0)};
    }
    const Stepper st{p, cfg.dt, std::sqrt(cfg.dt)};
    const long steps = static_cast<long>(std::floor(horizon / cfg.dt + 1e-9));
    const int width = cfg.antithetic ? 2 : 1;
    for (long first = 0; first < cfg.n_paths; first += width) {
        const int n = static_cast<int>(std::min<long>(width, cfg.n_paths - first));
        auto rng = substream(cfg.seed, static_cast<std::uint64_t>(first / width));
        boost::random::normal_distribution<double> normal;
        boost::random::uniform_01<double> unif;
        double xs[2] = {x, x}, d_val[2] = {0, 0}, u_val[2] = {0, 0};
        bool alive[2] = {true, n > 1};
        int left = n;
        for (long k = 1; k <= steps && left > 0; ++k) {
            const double zn = normal(rng);
            const double t = k * cfg.dt;
            for (int i = 0; i < n; ++i) {
                if (!alive[i]) continue;
                const double prev = xs[i];
                const double s = st.vol(prev);
                xs[i] += st.drift(prev) + s * (i == 0 ? zn : -zn);
                bool hit_down = xs[i] <= y, hit_up = xs[i] >= z;
                if (!hit_down && !hit_up && cfg.bridge_correction) {
                    // Probability that the Brownian bridge between the grid
                    // values touched a barrier inside the step.
                    const double s2 = s * s;
                    const double pd = std::exp(-2.0 * (prev - y) * (xs[i] - y) / s2);
                    const double pu = std::exp(-2.0 * (z - prev) * (z - xs[i]) / s2);
                    const double u = unif(rng);
                    if (u < pd) hit_down = true;
                    else if (u < pd + pu) hit_up = true;
                }
                if (hit_down || hit_up) {
                    (hit_down ? d_val : u_val)[i] = std::exp(-q * t);
                    alive[i] = false;
                    --left;
                }
            }
        }
        down.add((d_val[0] + (n > 1 ? d_val[1] : 0.0)) / n);
        up.add((u_val[0] + (n > 1 ? u_val[1] : 0.0)) / n);
    }
    return {down.finish(cfg.n_paths, bias), up.finish(cfg.n_paths, bias)};
}

void write_paths_csv(std::ostream& os, const std::vector<PathRecord>& paths, double a) {
    os << "path_id,time,surplus,dividend_amount,regime\n";
    os << std::setprecision(17);
    auto regime = [a](double x) { return x <= a ? "minus" : "plus"; };
    for (const auto& r : paths) {
        size_t d = 0;
        for (size_t k = 0; k < r.times.size(); ++k) {
            const double t = r.times[k], x = r.surplus[k];
            os << r.path_id << ',' << t << ',' << x << ",0," << regime(x) << '\n';
            if (d < r.dividends.size() && r.dividends[d].first == t) {
                const double post = r.reset_level;
                os << r.path_id << ',' << t << ',' << post << ',' << r.dividends[d].second << ','
                   << regime(post) << '\n';
                ++d;
            }
        }
    }
}

}  // namespace divopt
