#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "divopt/model.hpp"
#include "divopt/oracle.hpp"
#include "divopt/sim.hpp"
#include "json.hpp"

namespace divopt::cli {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalError = 3, kNotProven = 4 };

struct SweepSpec {
    std::string axis = "beta";
    double from = 0.0, to = 0.0;
    int steps = 0;
};

struct VerifyPair {
    std::optional<BarrierPair> pair;  ///< empty: verify the solver output
};

/// Everything a command needs.  Sections: model, simulate, oracle, sweep,
/// verify, plus top-level seed.
struct RunConfig {
    Regime plus{0.0, 1.0}, minus{0.0, 1.0};
    double a = 1.0, q = 0.1, beta = 0.1;
    std::uint64_t seed = 0;
    SimConfig sim;
    std::optional<double> x0;  ///< simulation start; default (z1 + z2) / 2
    GridSpec grid;
    SweepSpec sweep;
    VerifyPair verify;

    ModelParams params() const { return {plus, minus, a, q, beta}; }
};

/// Throws ConfigError on unknown keys, wrong types or a missing model block.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

/// Write through a temporary file and rename it into place.
void write_atomic(const std::string& path, const std::string& contents);

/// Runs the command line; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace divopt::cli
