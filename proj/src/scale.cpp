#include "divopt/scale.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "divopt/errors.hpp"

namespace divopt {

namespace {
// Budget for log|g| and its derivatives; products of two scale values stay finite.
constexpr double kTailExponent = 690.0;
}  // namespace

ScaleContext::ScaleContext(const ModelParams& p) : p_(p), c_(derive_constants(p)) {
    const double a = p.a();
    const double t1m = c_.theta1_minus, t2m = c_.theta2_minus;
    gm0_ = c_.c_minus * std::exp(-t2m * a) + (1.0 - c_.c_minus) * std::exp(t1m * a);
    gp0_ = std::exp(-t2m * a);
    k_low_ = (1.0 - c_.c_minus) * std::exp((t1m - t2m) * a);
    up_ = (1.0 - c_.c_plus) * gm0_;
    down_ = gp0_ - c_.c_plus * gm0_;
    const double t2p = c_.theta2_plus;
    const double head = std::log(up_ * std::max(1.0, t2p * t2p));
    x_max_ = a + std::max(0.0, kTailExponent - std::max(0.0, head)) / t2p;
}

void ScaleContext::check_domain(double x) const {
    if (!(x <= x_max_) || !(x >= -0.5 * kTailExponent / (c_.theta1_minus + c_.theta2_minus))) {
        std::ostringstream os;
        os << "x = " << x << " outside the supported domain (x_max = " << x_max_ << ")";
        throw DomainError(os.str());
    }
}

double ScaleContext::g_minus(double x) const {
    check_domain(x);
    const double d = x - p_.a();
    if (d > 0.0) return std::exp(-c_.theta1_plus * d);
    return c_.c_minus * std::exp(c_.theta2_minus * d) + (1.0 - c_.c_minus) * std::exp(-c_.theta1_minus * d);
}

double ScaleContext::g_plus(double x) const {
    check_domain(x);
    const double d = x - p_.a();
    if (d > 0.0)
        return (1.0 - c_.c_plus) * std::exp(c_.theta2_plus * d) + c_.c_plus * std::exp(-c_.theta1_plus * d);
    return std::exp(c_.theta2_minus * d);
}

double ScaleContext::g_minus_prime(double x) const {
    check_domain(x);
    const double d = x - p_.a();
    if (d > 0.0) return -c_.theta1_plus * std::exp(-c_.theta1_plus * d);
    return c_.c_minus * c_.theta2_minus * std::exp(c_.theta2_minus * d)
           - (1.0 - c_.c_minus) * c_.theta1_minus * std::exp(-c_.theta1_minus * d);
}

double ScaleContext::g_plus_prime(double x) const {
    check_domain(x);
    const double d = x - p_.a();
    if (d > 0.0)
        return (1.0 - c_.c_plus) * c_.theta2_plus * std::exp(c_.theta2_plus * d)
               - c_.c_plus * c_.theta1_plus * std::exp(-c_.theta1_plus * d);
    return c_.theta2_minus * std::exp(c_.theta2_minus * d);
}

double ScaleContext::g(double x) const {
    check_domain(x);
    const double t1m = c_.theta1_minus, t2m = c_.theta2_minus;
    if (x <= p_.a()) return k_low_ * std::exp(-t1m * x) * std::expm1((t1m + t2m) * x);
    const double d = x - p_.a();
    return up_ * std::exp(c_.theta2_plus * d) - down_ * std::exp(-c_.theta1_plus * d);
}

double ScaleContext::g_prime(double x) const {
    check_domain(x);
    const double t1m = c_.theta1_minus, t2m = c_.theta2_minus;
    if (x <= p_.a()) return k_low_ * (t2m * std::exp(t2m * x) + t1m * std::exp(-t1m * x));
    const double d = x - p_.a();
    const double t1p = c_.theta1_plus, t2p = c_.theta2_plus;
    return up_ * t2p * std::exp(t2p * d) + down_ * t1p * std::exp(-t1p * d);
}

double ScaleContext::g_double_prime(double x, Side side) const {
    check_domain(x);
    const bool low = x < p_.a() || (x == p_.a() && side == Side::Left);
    const double t1m = c_.theta1_minus, t2m = c_.theta2_minus;
    if (low) return k_low_ * (t2m * t2m * std::exp(t2m * x) - t1m * t1m * std::exp(-t1m * x));
    const double d = x - p_.a();
    const double t1p = c_.theta1_plus, t2p = c_.theta2_plus;
    return up_ * t2p * t2p * std::exp(t2p * d) - down_ * t1p * t1p * std::exp(-t1p * d);
}

double ScaleContext::g_double_prime(double x) const { return g_double_prime(x, Side::Left); }

double ScaleContext::h2() const { return -g_double_prime(p_.a(), Side::Right); }

double ScaleContext::exit_down(double x, double y, double z) const {
    if (!(y <= x && x <= z && y < z)) throw DomainError("exit_down requires y <= x <= z and y < z");
    if (x == y) return 1.0;
    if (x == z) return 0.0;
    const double gpz = g_plus(z), gmz = g_minus(z);
    const double num = gpz * g_minus(x) - gmz * g_plus(x);
    const double den = gpz * g_minus(y) - gmz * g_plus(y);
    return std::clamp(num / den, 0.0, 1.0);
}

double ScaleContext::exit_up(double x, double y, double z) const {
    if (!(y <= x && x <= z && y < z)) throw DomainError("exit_up requires y <= x <= z and y < z");
    if (x == z) return 1.0;
    if (x == y) return 0.0;
    const double gpy = g_plus(y), gmy = g_minus(y);
    const double num = gpy * g_minus(x) - gmy * g_plus(x);
    const double den = gpy * g_minus(z) - gmy * g_plus(z);
    return std::clamp(num / den, 0.0, 1.0);
}

double value_upper_bound(const ModelParams& p, double x) {
    auto term = [&](const Regime& r) {
        return (std::sqrt(r.mu * r.mu + 2.0 * p.q() * r.sigma * r.sigma) + r.mu) / (2.0 * p.q());
    };
    return x + term(p.plus()) + term(p.minus());
}

}  // namespace divopt
