#include "divopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "divopt/errors.hpp"

namespace divopt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Lattice {
    double z1_lo, h1, z2_lo, h2;
    int n1, n2;  // node counts
    std::vector<double> g1, g2;
    std::vector<double> zeta;  // row-major, n1 x n2

    double z1(int i) const { return z1_lo + h1 * i; }
    double z2(int j) const { return z2_lo + h2 * j; }
    double at(int i, int j) const { return zeta[static_cast<size_t>(i) * n2 + j]; }
};

Lattice evaluate(const ScaleContext& ctx, double z1_lo, double z1_hi, double z2_lo, double z2_hi,
                 int n1, int n2, long& evals) {
    Lattice L{z1_lo, n1 > 1 ? (z1_hi - z1_lo) / (n1 - 1) : 0.0, z2_lo,
              n2 > 1 ? (z2_hi - z2_lo) / (n2 - 1) : 0.0, n1, n2, {}, {}, {}};
    L.g1.resize(n1);
    L.g2.resize(n2);
    for (int i = 0; i < n1; ++i) L.g1[i] = ctx.g(L.z1(i));
    for (int j = 0; j < n2; ++j) L.g2[j] = ctx.g(L.z2(j));
    const double beta = ctx.params().beta();
    L.zeta.assign(static_cast<size_t>(n1) * n2, kNegInf);
    for (int i = 0; i < n1; ++i) {
        const double z1 = L.z1(i);
        for (int j = 0; j < n2; ++j) {
            const double d = L.z2(j) - z1;
            if (d <= beta) continue;
            L.zeta[static_cast<size_t>(i) * n2 + j] = (d - beta) / (L.g2[j] - L.g1[i]);
        }
    }
    evals += static_cast<long>(n1) * n2;
    return L;
}

struct Cell {
    int i, j;
    double v;
};

std::vector<Cell> top_cells(const Lattice& L, int k) {
    std::vector<Cell> local, all;
    for (int i = 0; i < L.n1; ++i) {
        for (int j = 0; j < L.n2; ++j) {
            const double v = L.at(i, j);
            if (v == kNegInf) continue;
            all.push_back({i, j, v});
            bool is_max = true;
            for (int di = -1; di <= 1 && is_max; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int ii = i + di, jj = j + dj;
                    if ((di || dj) && ii >= 0 && jj >= 0 && ii < L.n1 && jj < L.n2 && L.at(ii, jj) > v) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) local.push_back({i, j, v});
        }
    }
    auto by_value = [](const Cell& l, const Cell& r) { return l.v > r.v; };
    std::sort(local.begin(), local.end(), by_value);
    if (static_cast<int>(local.size()) > k) local.resize(k);
    if (static_cast<int>(local.size()) < k) {
        std::partial_sort(all.begin(), all.begin() + std::min<size_t>(all.size(), k), all.end(), by_value);
        for (const auto& c : all) {
            if (static_cast<int>(local.size()) >= k) break;
            bool dup = std::any_of(local.begin(), local.end(),
                                   [&](const Cell& o) { return o.i == c.i && o.j == c.j; });
            if (!dup) local.push_back(c);
        }
    }
    return local;
}

// Two near-optimal points belong to one maximum unless zeta dips by more
// than `drop` somewhere on the segment joining them.
bool same_basin(const ScaleContext& ctx, const OracleCandidate& x, const OracleCandidate& y, double drop) {
    const double floor = std::min(x.zeta, y.zeta) - drop;
    const double beta = ctx.params().beta();
    constexpr int kSamples = 64;
    for (int k = 1; k < kSamples; ++k) {
        const double t = static_cast<double>(k) / kSamples;
        const double z1 = x.pair.z1 + t * (y.pair.z1 - x.pair.z1);
        const double z2 = x.pair.z2 + t * (y.pair.z2 - x.pair.z2);
        if (z2 - z1 <= beta) return false;
        if (zeta(ctx, z1, z2) < floor) return false;
    }
    return true;
}

}  // namespace

OracleResult grid_maximize_zeta(const ScaleContext& ctx, GridSpec spec) {
    if (spec.n1 < 3 || spec.n2 < 3 || spec.zoom < 2 || spec.top_k < 1 || spec.refine_rounds < 0)
        throw ConfigError("oracle grid needs n1, n2 >= 3, zoom >= 2, top_k >= 1");
    if (spec.z1_hi <= 0.0 || spec.z2_hi <= 0.0) {
        const double label_bound = search_bound(ctx, solve_barriers(ctx).profile);
        if (spec.z1_hi <= 0.0) spec.z1_hi = label_bound;
        if (spec.z2_hi <= 0.0) spec.z2_hi = label_bound;
    }
    if (!(spec.z1_lo >= 0.0 && spec.z1_hi > spec.z1_lo && spec.z2_hi > spec.z2_lo))
        throw ConfigError("oracle grid ranges are empty");

    OracleResult res;
    res.grid = spec;
    Lattice base = evaluate(ctx, spec.z1_lo, spec.z1_hi, spec.z2_lo, spec.z2_hi, spec.n1, spec.n2,
                            res.evaluations);
    auto seeds = top_cells(base, spec.top_k);
    if (seeds.empty()) throw NumericalError("no feasible lattice point with z2 - z1 > beta");

    std::vector<OracleCandidate> finals;
    double h1 = base.h1, h2 = base.h2;
    const int half = 2 * spec.zoom;  // window of +-2 old cells
    for (const auto& s : seeds) {
        double c1 = base.z1(s.i), c2 = base.z2(s.j), best = s.v;
        double k1 = base.h1, k2 = base.h2;
        for (int r = 0; r < spec.refine_rounds; ++r) {
            const double n1h = k1 / spec.zoom, n2h = k2 / spec.zoom;
            double lo1 = std::max(spec.z1_lo, c1 - half * n1h);
            Lattice L = evaluate(ctx, lo1, lo1 + 2 * half * n1h, c2 - half * n2h, c2 + half * n2h,
                                 2 * half + 1, 2 * half + 1, res.evaluations);
            for (int i = 0; i < L.n1; ++i)
                for (int j = 0; j < L.n2; ++j)
                    if (L.at(i, j) > best) {
                        best = L.at(i, j);
                        c1 = L.z1(i);
                        c2 = L.z2(j);
                    }
            k1 = n1h;
            k2 = n2h;
        }
        h1 = k1;
        h2 = k2;
        finals.push_back({{c1, c2}, best});
    }
    std::sort(finals.begin(), finals.end(),
              [](const OracleCandidate& l, const OracleCandidate& r) { return l.zeta > r.zeta; });
    res.zeta_max = finals.front().zeta;
    res.spacing_z1 = h1;
    res.spacing_z2 = h2;
    for (const auto& f : finals) {
        if (f.zeta < res.zeta_max - spec.tie_rel * std::fabs(res.zeta_max)) continue;
        bool dup = std::any_of(res.argmaxes.begin(), res.argmaxes.end(), [&](const OracleCandidate& o) {
            return same_basin(ctx, o, f, spec.tie_rel * std::fabs(res.zeta_max));
        });
        if (!dup) res.argmaxes.push_back(f);
    }
    return res;
}

OracleComparison compare_solver_oracle(const ScaleContext& ctx, const BarrierSolutionSet& sol,
                                       const OracleResult& oracle) {
    OracleComparison cmp;
    cmp.zeta_solver = kNegInf;
    for (const auto& p : sol.pairs) cmp.zeta_solver = std::max(cmp.zeta_solver, zeta(ctx, p.z1, p.z2));
    cmp.zeta_oracle = oracle.zeta_max;
    cmp.value_ok = cmp.zeta_solver >= cmp.zeta_oracle - 1e-6 * std::fabs(cmp.zeta_solver);
    cmp.worst_offset = 0.0;
    for (const auto& c : oracle.argmaxes) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& p : sol.pairs) {
            const double d = std::max(std::fabs(p.z1 - c.pair.z1) / oracle.spacing_z1,
                                      std::fabs(p.z2 - c.pair.z2) / oracle.spacing_z2);
            nearest = std::min(nearest, d);
        }
        cmp.worst_offset = std::max(cmp.worst_offset, nearest);
    }
    cmp.argmax_ok = cmp.worst_offset <= 1.0;
    return cmp;
}

}  // namespace divopt
