#include "divopt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "divopt/errors.hpp"

namespace divopt {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

// Smallest x >= lo with g'(x) >= y on a branch where g' increases to infinity.
double tail_inverse(const ScaleContext& ctx, double y, double lo) {
    auto gp = [&](double x) { return ctx.g_prime(x); };
    if (gp(lo) >= y) return lo;
    double step = 1.0 / ctx.constants().theta2_plus;
    double hi = lo + step;
    while (gp(hi) < y) {
        if (hi >= ctx.x_max()) throw NumericalError("g' does not reach the requested level below x_max");
        step *= 2.0;
        hi = std::min(lo + step, ctx.x_max());
    }
    return clamped_inverse(gp, y, lo, hi, Monotone::Increasing);
}

// Solve F(x) = target for F increasing on [lo, inf) with F(lo) <= target.
double invert_increasing(const std::function<double(double)>& F, double target, double lo,
                         double first_step, double x_max) {
    double step = first_step;
    double hi = lo + step;
    while (F(hi) <= target) {
        if (hi >= x_max) throw BracketError("target not reached below x_max", lo, hi, F(lo), F(hi));
        step *= 2.0;
        hi = std::min(lo + step, x_max);
    }
    return invert_monotone(F, target, lo, hi, Monotone::Increasing);
}

double first_step(const ScaleContext& ctx) {
    return std::max(ctx.params().beta(), 1.0 / ctx.constants().theta2_plus);
}

}  // namespace

double gap_integral(const ScaleContext& ctx, double lo, double hi, double level) {
    if (hi <= lo) return 0.0;
    // g' > 0, so the relative tolerance of the quadrature is meaningful here.
    auto f = [&](double s) { return ctx.g_prime(s) / level; };
    const double a = ctx.params().a();
    double area = lo < a && a < hi ? integrate(f, lo, a) + integrate(f, a, hi) : integrate(f, lo, hi);
    return (hi - lo) - area;
}

double psi(const ScaleContext& ctx, double x, double y) {
    if (x > y) throw DomainError("psi(x, y) requires x <= y");
    return gap_integral(ctx, x, y, ctx.g_prime(y));
}

double psi_closed_form(const ScaleContext& ctx, double x, double y) {
    return (y - x) - (ctx.g(y) - ctx.g(x)) / ctx.g_prime(y);
}

double zeta(const ScaleContext& ctx, double z1, double z2) {
    return (z2 - z1 - ctx.params().beta()) / (ctx.g(z2) - ctx.g(z1));
}

// ---------------------------------------------------------------------------

SingleHumpFamily::SingleHumpFamily(const ScaleContext& ctx, double breakpoint)
    : ctx_(ctx), m_(breakpoint) {}

double SingleHumpFamily::lower(double y) const {
    if (m_ <= 0.0) return 0.0;
    return clamped_inverse([&](double z) { return ctx_.g_prime(z); }, y, 0.0, m_, Monotone::Decreasing);
}

double SingleHumpFamily::phi(double x) const {
    const double y = ctx_.g_prime(x);
    return gap_integral(ctx_, lower(y), x, y);
}

std::optional<double> SingleHumpFamily::zero_level() const {
    if (m_ <= 0.0) return std::nullopt;
    const double y0 = ctx_.g_prime(0.0);
    if (ctx_.g_prime(m_) >= y0) return std::nullopt;
    return tail_inverse(ctx_, y0, m_);
}

// ---------------------------------------------------------------------------

TwoHumpFamilies::TwoHumpFamilies(const ScaleContext& ctx, const ConvexityProfile& profile)
    : ctx_(ctx) {
    const auto& bp = profile.breakpoints;
    if (bp.size() == 3) {
        has_lower_ = true;
        r0_ = bp[0];
        a_ = bp[1];
        x0_ = bp[2];
    } else if (bp.size() == 2) {
        has_lower_ = false;
        r0_ = 0.0;
        a_ = bp[0];
        x0_ = bp[1];
    } else {
        throw NumericalError("two-hump families need two or three breakpoints");
    }
    auto gp = [&](double x) { return ctx_.g_prime(x); };
    d0_ = x0_;
    if (has_lower_ && gp(x0_) < gp(r0_)) d0_ = rise2_inv(gp(r0_));
    d1_ = rise2_inv(gp(a_));
    x_sw_ = first_nonnegative([&](double x) { return switch_integral(x); }, d0_, d1_);
    x_fam_ = first_nonnegative([&](double x) { return family_integral(x); }, d0_, d1_);
    p_ = rise1_inv(gp(x_fam_));
}

double TwoHumpFamilies::lo_bar(double y) const {
    if (!has_lower_) return 0.0;
    return clamped_inverse([&](double z) { return ctx_.g_prime(z); }, y, 0.0, r0_, Monotone::Decreasing);
}

double TwoHumpFamilies::rise1_inv(double y) const {
    return clamped_inverse([&](double z) { return ctx_.g_prime(z); }, y, r0_, a_, Monotone::Increasing);
}

double TwoHumpFamilies::fall_inv(double y) const {
    return clamped_inverse([&](double z) { return ctx_.g_prime(z); }, y, a_, x0_, Monotone::Decreasing);
}

double TwoHumpFamilies::rise2_inv(double y) const { return tail_inverse(ctx_, y, x0_); }

double TwoHumpFamilies::switch_integral(double x) const {
    const double y = ctx_.g_prime(x);
    return gap_integral(ctx_, lo_bar(y), fall_inv(y), y);
}

double TwoHumpFamilies::family_integral(double x) const {
    const double y = ctx_.g_prime(x);
    return gap_integral(ctx_, rise1_inv(y), x, y);
}

double TwoHumpFamilies::omega_a(double x) const {
    if (x > p_ && x < x_fam_) throw DomainError("omega_a is undefined between the family pieces");
    const double y = ctx_.g_prime(x);
    return gap_integral(ctx_, lo_bar(y), x, y);
}

double TwoHumpFamilies::omega_b_left(double x) const {
    const double y = ctx_.g_prime(x);
    return gap_integral(ctx_, fall_inv(y), x, y);
}

double TwoHumpFamilies::omega_b(double x) const {
    if (x < x_sw_) return omega_b_left(x);
    const double y = ctx_.g_prime(x);
    return gap_integral(ctx_, lo_bar(y), x, y);
}

// ---------------------------------------------------------------------------

double search_bound(const ScaleContext& ctx, const ConvexityProfile& profile) {
    const double a = ctx.params().a();
    const double m = profile.breakpoints.empty() ? 0.0 : profile.breakpoints.back();
    double gmax = std::max(ctx.g_prime(0.0), ctx.g_prime(m));
    if (a <= m) gmax = std::max(gmax, ctx.g_prime(a));
    const double zg = tail_inverse(ctx, gmax, m);
    // Past zg every candidate pair has psi(z1, z2) >= psi(zg, z2).
    const double beta = ctx.params().beta();
    const double z_hi = invert_increasing([&](double z) { return psi(ctx, zg, z); }, beta, zg,
                                          first_step(ctx), ctx.x_max());
    return std::min(1.25 * z_hi + beta, ctx.x_max());
}

namespace {

void solve_single(const ScaleContext& ctx, double m, BarrierSolutionSet& out) {
    SingleHumpFamily fam(ctx, m);
    const double beta = ctx.params().beta();
    out.constants.a4 = fam.zero_level();
    const double z2 = invert_increasing([&](double x) { return fam.phi(x); }, beta, m, first_step(ctx),
                                        ctx.x_max());
    const double z1 = fam.lower(ctx.g_prime(z2));
    out.pairs.push_back({z1, z2});
    out.candidates.push_back({{z1, z2}, "phi"});
    if (m <= 0.0) {
        out.trace.push_back("g convex on (0, inf): lower barrier at 0, z2 solves psi(0, z2) = beta");
    } else {
        out.trace.push_back("g concave then convex, breakpoint m = " + fmt(m) +
                            ": z2 = phi^-1(beta) on [m, inf), z1 = inf{z in [0, m] : g'(z) <= g'(z2)}");
    }
    if (out.constants.a4)
        out.trace.push_back("lower barrier reaches 0 from x = " + fmt(*out.constants.a4) +
                            (z2 >= *out.constants.a4 ? " (z1 = 0)" : " (z1 > 0)"));
}

void solve_two_hump(const ScaleContext& ctx, BarrierSolutionSet& out) {
    TwoHumpFamilies fam(ctx, out.profile);
    const double beta = ctx.params().beta();
    const bool both_positive = out.profile.breakpoints.size() == 3;
    if (both_positive) {
        out.constants.a5 = fam.scan_lo();
        out.constants.a6 = fam.scan_hi();
        out.constants.x1 = fam.x_switch();
        out.constants.x2 = fam.x_family();
    } else {
        out.constants.a7 = fam.scan_hi();
        out.constants.x3 = fam.x_switch();
        out.constants.x4 = fam.x_family();
    }
    const std::string A = both_positive ? "omega_1" : "omega_3";
    const std::string B = both_positive ? "omega_2" : "omega_4";
    out.trace.push_back("two-hump g': scan [" + fmt(fam.scan_lo()) + ", " + fmt(fam.scan_hi()) +
                        "], switch level " + fmt(fam.x_switch()) + ", family level " +
                        fmt(fam.x_family()));

    const double tol_deg = 1e-10 * std::max(1.0, beta);
    const double step = first_step(ctx);
    auto gp = [&](double x) { return ctx.g_prime(x); };

    // Family A: lower barrier lo_bar(g'(z2)).
    std::vector<double> zA;
    const double p = fam.family_gap_start(), xf = fam.x_family();
    const double vA1 = fam.omega_a(p), vA2 = fam.omega_a(xf);
    if (std::fabs(beta - vA1) <= tol_deg && std::fabs(beta - vA2) <= tol_deg && p < xf) {
        zA = {p, xf};
        out.degenerate = true;
        out.trace.push_back(A + " has two preimages of beta: " + fmt(p) + " and " + fmt(xf));
    } else if (beta < vA1) {
        zA = {invert_monotone([&](double x) { return fam.omega_a(x); }, beta, fam.rise_start(), p,
                              Monotone::Increasing)};
    } else if (beta >= vA2) {
        zA = {invert_increasing([&](double x) { return fam.omega_a(x); }, beta, xf, step, ctx.x_max())};
    } else if (std::fabs(beta - vA1) <= tol_deg) {
        zA = {p};
    } else {
        out.trace.push_back("beta falls in the jump of " + A + " over (" + fmt(vA1) + ", " + fmt(vA2) +
                            "): no family-A candidate");
    }

    // Family B: lower barrier on the falling piece of g'.
    const double xs = fam.x_switch();
    const double wB1 = fam.omega_b_left(xs), wB2 = fam.omega_b(xs);
    for (double z2 : zA) out.candidates.push_back({{fam.lo_bar(gp(z2)), z2}, A});
    if (beta > wB2) {
        out.trace.push_back("beta > " + B + "(switch level) = " + fmt(wB2) + ": family-A pair");
        if (zA.empty()) throw NumericalError("beta beyond the switch level but family A has no preimage");
        for (double z2 : zA) out.pairs.push_back({fam.lo_bar(gp(z2)), z2});
        return;
    }
    std::optional<double> zB;
    if (beta < wB1) {
        zB = invert_monotone([&](double x) { return fam.omega_b_left(x); }, beta, fam.x0(), xs,
                             Monotone::Increasing);
    } else if (std::fabs(beta - wB1) <= tol_deg) {
        zB = xs;
    } else {
        out.trace.push_back("beta falls in the jump of " + B + ": no family-B candidate");
    }

    if (zB) out.candidates.push_back({{fam.fall_inv(gp(*zB)), *zB}, B});
    if (zA.empty() && !zB) throw NumericalError("neither candidate family has a preimage of beta");
    auto push_A = [&] {
        for (double z2 : zA) out.pairs.push_back({fam.lo_bar(gp(z2)), z2});
    };
    auto push_B = [&] { out.pairs.push_back({fam.fall_inv(gp(*zB)), *zB}); };
    if (zA.empty()) {
        push_B();
        out.trace.push_back("only the " + B + " candidate exists");
        return;
    }
    if (!zB) {
        push_A();
        out.trace.push_back("only the " + A + " candidate exists");
        return;
    }
    const double gA = gp(zA.front()), gB = gp(*zB);
    out.trace.push_back("g'(" + A + "^-1) = " + fmt(gA) + ", g'(" + B + "^-1) = " + fmt(gB));
    if (std::fabs(gA - gB) <= 1e-9 * std::max(gA, gB)) {
        push_A();
        push_B();
        out.trace.push_back("tie: both families are optimal");
    } else if (gA < gB) {
        push_A();
        out.trace.push_back("smaller g'(z2) in family A");
    } else {
        push_B();
        out.trace.push_back("smaller g'(z2) in family B");
    }
}

}  // namespace

BarrierSolutionSet solve_barriers(const ScaleContext& ctx) {
    BarrierSolutionSet out;
    out.constants = ctx.constants();
    out.label = classify_case(ctx.params(), out.constants);
    out.profile = convexity_profile(ctx.params(), out.constants, out.label);
    out.trace.push_back("case " + to_string(out.label));
    const auto& s = out.profile.signs;
    if (s.size() == 1) {
        solve_single(ctx, 0.0, out);
    } else if (s.size() == 2) {
        solve_single(ctx, out.profile.breakpoints[0], out);
    } else {
        solve_two_hump(ctx, out);
    }
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const BarrierPair& l, const BarrierPair& r) { return l.z2 < r.z2; });
    return out;
}

BarrierSolutionSet solve_barriers(const ModelParams& p) {
    ScaleContext ctx(p);
    return solve_barriers(ctx);
}

}  // namespace divopt
