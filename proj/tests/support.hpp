#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "divopt/model.hpp"

namespace divopt::testing {

/// Random parameter set over a box wide enough to reach every case label.
inline ModelParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        const double mup = -1.0 + 2.0 * u(rng), mum = -1.0 + 2.0 * u(rng);
        const double sp = 0.1 + 1.2 * u(rng), sm = 0.1 + 1.2 * u(rng);
        const double a = 0.2 + 3.0 * u(rng), q = 0.01 + 0.5 * u(rng), beta = 0.05 + 1.5 * u(rng);
        try {
            return ModelParams({mup, sp}, {mum, sm}, a, q, beta);
        } catch (const std::exception&) {
        }
    }
}

/// Every sub-case label the classifier can return.
inline std::vector<std::string> all_labels() {
    return {"both-positive/i",   "both-positive/ii",   "both-positive/iii",
            "both-positive/iv",  "both-nonpositive",   "mixed-minus-positive/a-le-a1",
            "mixed-minus-positive/a-gt-a1", "mixed-plus-positive/i", "mixed-plus-positive/ii"};
}

/// Draw until each label has `per_label` members (or `max_draws` is hit).
inline std::vector<ModelParams> stratified_params(std::uint64_t seed, int per_label, int max_draws = 200000) {
    std::mt19937_64 rng(seed);
    std::map<std::string, int> have;
    std::vector<ModelParams> out;
    const auto labels = all_labels();
    for (int k = 0; k < max_draws && static_cast<int>(out.size()) < per_label * static_cast<int>(labels.size()); ++k) {
        ModelParams p = random_params(rng);
        const auto lab = to_string(classify_case(p, derive_constants(p)));
        if (have[lab] >= per_label) continue;
        ++have[lab];
        out.push_back(p);
    }
    return out;
}

}  // namespace divopt::testing
