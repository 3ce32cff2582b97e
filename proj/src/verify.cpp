#include "divopt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "divopt/errors.hpp"

namespace divopt {

namespace {
constexpr double kSlack = 1e-9;
constexpr double kAvoid = 1e-7;
}  // namespace

ValueFunction::ValueFunction(const ScaleContext& ctx, BarrierPair pair) : ctx_(ctx), pair_(pair) {
    const double beta = ctx.params().beta();
    if (!(pair.z1 >= 0.0 && pair.z2 - pair.z1 >= beta))
        throw DomainError("barrier pair must satisfy 0 <= z1 and z2 - z1 >= beta");
    const double gz2 = ctx.g(pair.z2), gz1 = ctx.g(pair.z1), gp2 = ctx.g_prime(pair.z2);
    const double general = (pair.z2 - pair.z1 - beta) / (gz2 - gz1);
    first_order_ = std::fabs(general * gp2 - 1.0) <= 1e-8;
    norm_ = first_order_ ? 1.0 / gp2 : general;
    tail_offset_ = first_order_ ? gz2 / gp2 - pair.z2 : gz1 * general - pair.z1 - beta;
}

double ValueFunction::operator()(double x) const {
    if (x < 0.0) return 0.0;
    if (x < pair_.z2) return ctx_.g(x) * norm_;
    return tail_offset_ + x;
}

double ValueFunction::derivative(double x) const {
    if (x < 0.0) return 0.0;
    if (x < pair_.z2) return ctx_.g_prime(x) * norm_;
    return 1.0;
}

double ValueFunction::second_derivative(double x, Side side) const {
    if (x < 0.0 || x > pair_.z2 || (x == pair_.z2 && side == Side::Right)) return 0.0;
    return ctx_.g_double_prime(x, side) * norm_;
}

double ValueFunction::generator(double x, Side side) const {
    const auto& p = ctx_.params();
    const bool low = x < p.a() || (x == p.a() && side == Side::Left);
    const Regime& r = low ? p.minus() : p.plus();
    return 0.5 * r.sigma * r.sigma * second_derivative(x, side) + r.mu * derivative(x) - p.q() * (*this)(x);
}

std::vector<double> verification_grid(const ScaleContext& ctx, BarrierPair pair, double x_hi, int n) {
    const double a = ctx.params().a();
    std::vector<double> pts;
    const int uniform = std::max(10, n / 2);
    for (int i = 1; i <= uniform; ++i) pts.push_back(x_hi * i / uniform);
    const int per_anchor = std::max(2, (n - uniform) / 8);
    for (double anchor : {0.0, a, pair.z1, pair.z2}) {
        for (int side : {-1, +1}) {
            for (int k = 0; k < per_anchor; ++k) {
                // Offsets from 1e-6 up to 1e-1 of the scale, geometrically spaced.
                const double off = std::max(1.0, x_hi) * std::pow(10.0, -6.0 + 5.0 * k / (per_anchor - 1));
                pts.push_back(anchor + side * off);
            }
        }
    }
    std::vector<double> out;
    for (double x : pts) {
        if (!(x > 0.0 && x <= x_hi)) continue;
        if (std::fabs(x - a) < kAvoid || std::fabs(x - pair.z2) < kAvoid) continue;
        out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

IncrementCheck check_increment_inequality(const ValueFunction& vf, int grid_size) {
    if (grid_size < 2) throw ConfigError("increment check needs at least two grid points");
    const double beta = vf.context().params().beta();
    const BarrierPair pr = vf.pair();
    std::vector<double> xs;
    for (int i = 0; i < grid_size; ++i) xs.push_back(2.0 * pr.z2 * i / (grid_size - 1));
    xs.push_back(pr.z1);
    xs.push_back(pr.z2);
    std::sort(xs.begin(), xs.end());
    std::vector<double> v(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) v[i] = vf(xs[i]);
    IncrementCheck best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (size_t i = 0; i < xs.size(); ++i) {
        for (size_t j = 0; j <= i; ++j) {
            const double s = v[i] - v[j] - (xs[i] - xs[j] - beta);
            if (s < best.min_slack) best = {s, xs[i], xs[j]};
        }
    }
    return best;
}

QviCheck check_qvi(const ValueFunction& vf, const std::vector<double>& grid) {
    const double a = vf.context().params().a();
    const double z2 = vf.pair().z2;
    QviCheck out{0.0, -std::numeric_limits<double>::infinity(), 0.0, 0};
    for (double x : grid) {
        if (x <= 0.0 || x == a || x == z2) continue;
        const double r = vf.generator(x, x < a ? Side::Left : Side::Right);
        ++out.points;
        if (x < z2) {
            out.interior_residual = std::max(out.interior_residual, std::fabs(r));
        } else if (r > out.tail_max) {
            out.tail_max = r;
            out.tail_argmax = x;
        }
    }
    return out;
}

std::string to_string(Verdict v) { return v == Verdict::OptimalProven ? "optimal-proven" : "not-proven"; }

VerificationReport check_conditions(const ValueFunction& vf) {
    const ScaleContext& ctx = vf.context();
    const auto& p = ctx.params();
    const double a = p.a(), q = p.q();
    const BarrierPair pr = vf.pair();
    VerificationReport r{};
    r.pair = pr;
    r.first_order = vf.first_order();
    r.value_at_z2 = vf(pr.z2);

    const double ratio_z2 = ctx.g(pr.z2) / ctx.g_prime(pr.z2);
    r.condition_a = pr.z2 > a;
    r.condition_b_residual = p.plus().mu - q * (a - pr.z2 + ratio_z2);
    r.condition_b = pr.z2 <= a && r.condition_b_residual <= 0.0;
    r.g2_at_a_plus = ctx.g_double_prime(a, Side::Right);
    r.condition_c = r.g2_at_a_plus >= 0.0;
    r.slope_ratio_ok = pr.z2 > a || ctx.g(a) / ctx.g_prime(a) <= ratio_z2 + a - pr.z2 + kSlack;

    const double x_hi = std::min(ctx.x_max(), 2.0 * std::max(pr.z2, a) + 1.0);
    const auto qvi = check_qvi(vf, verification_grid(ctx, pr, x_hi));
    r.interior_residual = qvi.interior_residual;
    r.interior_tolerance = 1e-8 * q * r.value_at_z2;
    r.qvi_max_residual = qvi.tail_max;
    r.increment_min_slack = check_increment_inequality(vf).min_slack;

    std::vector<std::string> why;
    if (!(r.condition_a || r.condition_b || r.condition_c)) why.push_back("none of conditions a, b, c holds");
    if (r.interior_residual > r.interior_tolerance) why.push_back("interior residual above tolerance");
    if (r.qvi_max_residual > kSlack) why.push_back("generator positive beyond z2");
    if (r.increment_min_slack < -kSlack) why.push_back("increment inequality violated");
    r.verdict = why.empty() ? Verdict::OptimalProven : Verdict::NotProven;
    for (size_t i = 0; i < why.size(); ++i) r.reason += (i ? "; " : "") + why[i];
    if (why.empty()) {
        r.reason = "conditions:";
        if (r.condition_a) r.reason += " a";
        if (r.condition_b) r.reason += " b";
        if (r.condition_c) r.reason += " c";
    }
    return r;
}

std::string to_key_value(const VerificationReport& r) {
    std::ostringstream os;
    os.precision(17);
    auto b = [](bool v) { return v ? "true" : "false"; };
    os << "z1=" << r.pair.z1 << "\n"
       << "z2=" << r.pair.z2 << "\n"
       << "first_order=" << b(r.first_order) << "\n"
       << "condition_a=" << b(r.condition_a) << "\n"
       << "condition_b=" << b(r.condition_b) << "\n"
       << "condition_b_residual=" << r.condition_b_residual << "\n"
       << "condition_c=" << b(r.condition_c) << "\n"
       << "g2_at_a_plus=" << r.g2_at_a_plus << "\n"
       << "slope_ratio_ok=" << b(r.slope_ratio_ok) << "\n"
       << "interior_residual=" << r.interior_residual << "\n"
       << "interior_tolerance=" << r.interior_tolerance << "\n"
       << "qvi_max_residual=" << r.qvi_max_residual << "\n"
       << "increment_min_slack=" << r.increment_min_slack << "\n"
       << "value_at_z2=" << r.value_at_z2 << "\n"
       << "verdict=" << to_string(r.verdict) << "\n"
       << "reason=" << r.reason << "\n";
    return os.str();
}

}  // namespace divopt
