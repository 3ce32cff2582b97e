#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "divopt/model.hpp"
#include "divopt/solver.hpp"

namespace divopt {

struct SimConfig {
    double dt = 1e-3;
    double horizon = 0.0;  ///< 0 selects max(20/q, 50)
    long n_paths = 10000;
    std::uint64_t seed = 0;
    bool antithetic = true;
    bool store_paths = false;
    /// Sub-step barrier crossing test.  Only the exit estimator honours it;
    /// ruin in controlled paths is always detected on the time grid.
    bool bridge_correction = true;
};

/// Horizon after applying the default rule.
double resolved_horizon(const SimConfig& cfg, double q);

/// Throws ConfigError for dt <= 0, horizon < dt or n_paths < 1.
void validate(const SimConfig& cfg, double q);

/// One controlled path.  `surplus[k]` is the state at `times[k]` before any
/// dividend paid at that time.
struct PathRecord {
    std::uint64_t path_id = 0;
    double reset_level = 0.0;  ///< z1, the surplus right after a dividend
    std::vector<double> times;
    std::vector<double> surplus;
    std::vector<std::pair<double, double>> dividends;  ///< (time, amount)
    std::optional<double> ruin_time;
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci95_lo = 0.0, ci95_hi = 0.0;
    long n_paths = 0;
    double truncation_bias_bound = 0.0;
};

/// Euler-Maruyama paths under the (z1, z2) strategy, handed to `sink` in
/// path order.  Path i draws from substream i / 2 of the seed; with
/// antithetic sampling odd paths use the negated increments of their
/// partner.
void simulate_controlled(const ModelParams& p, BarrierPair pair, const SimConfig& cfg, double x0,
                         const std::function<void(const PathRecord&)>& sink);

std::vector<PathRecord> simulate_controlled(const ModelParams& p, BarrierPair pair, const SimConfig& cfg,
                                            double x0);

/// Mean discounted net dividends sum e^{-q t}(dL - beta) up to ruin or horizon.
MCEstimate estimate_value_mc(const ModelParams& p, BarrierPair pair, const SimConfig& cfg, double x0);

struct ExitEstimate {
    MCEstimate down;  ///< E_x[e^{-q T_y}; T_y < T_z]
    MCEstimate up;    ///< E_x[e^{-q T_z}; T_z < T_y]
};

/// Two-sided exit of the uncontrolled surplus from (y, z) started at x.
ExitEstimate estimate_exit_mc(const ModelParams& p, const SimConfig& cfg, double x, double y, double z);

/// Long-format CSV: path_id,time,surplus,dividend_amount,regime.  An impulse
/// adds a second row at the same time holding the post-dividend surplus.
void write_paths_csv(std::ostream& os, const std::vector<PathRecord>& paths, double a);

}  // namespace divopt
