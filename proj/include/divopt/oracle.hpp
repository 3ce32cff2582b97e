#pragma once

#include <vector>

#include "divopt/scale.hpp"
#include "divopt/solver.hpp"

namespace divopt {

/// Lattice for the brute-force maximization of zeta.  A zero upper bound
/// means "use search_bound()".
struct GridSpec {
    double z1_lo = 0.0, z1_hi = 0.0;
    double z2_lo = 0.0, z2_hi = 0.0;
    int n1 = 400, n2 = 400;
    int refine_rounds = 3;
    int zoom = 10;
    int top_k = 5;
    double tie_rel = 1e-6;
};

struct OracleCandidate {
    BarrierPair pair;
    double zeta;
};

struct OracleResult {
    double zeta_max = 0.0;
    std::vector<OracleCandidate> argmaxes;  ///< near-ties of zeta_max, best first
    double spacing_z1 = 0.0, spacing_z2 = 0.0;  ///< final lattice spacing
    long evaluations = 0;
    GridSpec grid;  ///< with defaults resolved
};

/// Maximize zeta over {0 <= z1 < z2, z2 - z1 > beta} by lattice search with
/// zoomed re-gridding around the best local maxima.  No derivatives used.
OracleResult grid_maximize_zeta(const ScaleContext& ctx, GridSpec spec = {});

struct OracleComparison {
    double zeta_solver = 0.0;
    double zeta_oracle = 0.0;
    bool value_ok = false;   ///< zeta_solver >= zeta_oracle - 1e-6 zeta_solver
    bool argmax_ok = false;  ///< every oracle argmax within one final spacing of a solver pair
    double worst_offset = 0.0;  ///< largest distance to the nearest solver pair, in spacings
};

OracleComparison compare_solver_oracle(const ScaleContext& ctx, const BarrierSolutionSet& sol,
                                       const OracleResult& oracle);

}  // namespace divopt
