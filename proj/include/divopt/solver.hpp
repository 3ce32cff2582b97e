#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "divopt/model.hpp"
#include "divopt/numerics.hpp"
#include "divopt/scale.hpp"

namespace divopt {

/// psi(x, y) = integral over [x, y] of (1 - g'(s) / g'(y)) ds, by quadrature.
double psi(const ScaleContext& ctx, double x, double y);

/// Integral over [lo, hi] of (1 - g'(s) / level) ds, by quadrature.
double gap_integral(const ScaleContext& ctx, double lo, double hi, double level);

/// Closed form of psi through g.  Used as an independent check of psi().
double psi_closed_form(const ScaleContext& ctx, double x, double y);

/// Objective (z2 - z1 - beta) / (g(z2) - g(z1)) for z1 < z2.
double zeta(const ScaleContext& ctx, double z1, double z2);

struct BarrierPair {
    double z1;
    double z2;
};

/// A stationary pair considered by the solver and the family it came from.
struct Candidate {
    BarrierPair pair;
    std::string family;
};

/// Maximizers of zeta together with how they were obtained.
struct BarrierSolutionSet {
    CaseLabel label;
    ConvexityProfile profile;
    DerivedConstants constants;  ///< with the inverse-based levels filled in
    std::vector<BarrierPair> pairs;
    std::vector<Candidate> candidates;  ///< every candidate, selected or not
    bool degenerate = false;     ///< boundary value of beta where one family has two preimages
    std::vector<std::string> trace;
};

/// One concave piece followed by one convex piece of g (or a convex g when
/// the breakpoint is 0).
class SingleHumpFamily {
public:
    SingleHumpFamily(const ScaleContext& ctx, double breakpoint);

    double breakpoint() const { return m_; }
    /// inf{z in [0, m] : g'(z) <= y}.
    double lower(double y) const;
    /// psi(lower(g'(x)), x) for x >= m.
    double phi(double x) const;
    /// First x >= m where lower(g'(x)) reaches 0, if g'(m) < g'(0).
    std::optional<double> zero_level() const;

private:
    const ScaleContext& ctx_;
    double m_;
};

/// g' rising, falling, rising again beyond the threshold.  Covers the
/// both-positive case with breakpoints (a1, a, x0) and the mixed case with
/// breakpoints (a, x0).
class TwoHumpFamilies {
public:
    TwoHumpFamilies(const ScaleContext& ctx, const ConvexityProfile& profile);

    double lo_bar(double y) const;     ///< lower barrier candidate on [0, r0]
    double rise1_inv(double y) const;  ///< inverse of g' on [r0, a]
    double fall_inv(double y) const;   ///< inverse of g' on [a, x0]
    double rise2_inv(double y) const;  ///< inverse of g' on [x0, inf)

    double switch_integral(double x) const;
    double family_integral(double x) const;

    double scan_lo() const { return d0_; }
    double scan_hi() const { return d1_; }
    double x_switch() const { return x_sw_; }
    double x_family() const { return x_fam_; }
    double rise_start() const { return r0_; }
    double x0() const { return x0_; }
    /// rise1_inv(g'(x_family())): the end of the first piece of omega_a's domain.
    double family_gap_start() const { return p_; }

    /// Throws DomainError inside (family_gap_start(), x_family()).
    double omega_a(double x) const;
    /// Left piece is used on [x0, x_switch()), right piece from x_switch() on.
    double omega_b(double x) const;
    double omega_b_left(double x) const;

private:
    const ScaleContext& ctx_;
    bool has_lower_;  // false when the first piece starts at 0
    double r0_, a_, x0_;
    double d0_, d1_;
    double x_sw_, x_fam_, p_;
};

/// Upper bound on any maximizing z2, shared by the solver and the oracle.
double search_bound(const ScaleContext& ctx, const ConvexityProfile& profile);

BarrierSolutionSet solve_barriers(const ScaleContext& ctx);
BarrierSolutionSet solve_barriers(const ModelParams& p);

}  // namespace divopt
