#include "divopt/model.hpp"

#include <cmath>
#include <sstream>
#include <tuple>

#include "divopt/errors.hpp"

namespace divopt {

namespace {

// Largest exponent argument we let the scale functions reach.
constexpr double kMaxExponent = 600.0;

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

bool finite(double v) { return std::isfinite(v); }

std::optional<double> positive_log_ratio(double num, double den, double scale) {
    if (!(num > 0.0 && den > 0.0) && !(num < 0.0 && den < 0.0)) return std::nullopt;
    double v = std::log(num / den) / scale;
    if (!(v > 0.0) || !finite(v)) return std::nullopt;
    return v;
}

// Comparisons against optional thresholds; an absent threshold never matches.
bool le(std::optional<double> lhs, double rhs) { return lhs && *lhs <= rhs; }
bool le(double lhs, std::optional<double> rhs) { return rhs && lhs <= *rhs; }
bool lt(std::optional<double> lhs, double rhs) { return lhs && *lhs < rhs; }
bool lt(double lhs, std::optional<double> rhs) { return rhs && lhs < *rhs; }

std::optional<double> opt_min(std::optional<double> x, std::optional<double> y) {
    if (!x || !y) return std::nullopt;
    return std::min(*x, *y);
}

std::optional<double> opt_max(std::optional<double> x, std::optional<double> y) {
    if (!x || !y) return std::nullopt;
    return std::max(*x, *y);
}

}  // namespace

ModelParams::ModelParams(Regime plus, Regime minus, double a, double q, double beta)
    : plus_(plus), minus_(minus), a_(a), q_(q), beta_(beta) {
    require(finite(plus.mu) && finite(minus.mu), "drifts must be finite");
    require(finite(plus.sigma) && plus.sigma > 0.0, "sigma_plus must be positive");
    require(finite(minus.sigma) && minus.sigma > 0.0, "sigma_minus must be positive");
    require(finite(a) && a > 0.0, "threshold a must be positive");
    require(finite(q) && q > 0.0, "discount rate q must be positive");
    require(finite(beta) && beta > 0.0, "transaction cost beta must be positive");
    auto [t1m, t2m] = characteristic_exponents(minus, q);
    auto [t1p, t2p] = characteristic_exponents(plus, q);
    require(finite(t1m) && finite(t2m) && finite(t1p) && finite(t2p),
            "characteristic exponents are not finite");
    std::ostringstream os;
    os << "exponent (theta1_minus + theta2_minus) * a = " << (t1m + t2m) * a
       << " exceeds " << kMaxExponent << "; parameters outside the supported range";
    require((t1m + t2m) * a <= kMaxExponent, os.str());
}

std::pair<double, double> characteristic_exponents(const Regime& r, double q) {
    const double s2 = r.sigma * r.sigma;
    const double disc = std::sqrt(r.mu * r.mu + 2.0 * q * s2);
    // Use the product of the roots to avoid cancellation in the small one.
    double theta1, theta2;
    if (r.mu >= 0.0) {
        theta1 = (disc + r.mu) / s2;
        theta2 = 2.0 * q / (disc + r.mu);
    } else {
        theta2 = (disc - r.mu) / s2;
        theta1 = 2.0 * q / (disc - r.mu);
    }
    return {theta1, theta2};
}

DerivedConstants derive_constants(const ModelParams& p) {
    DerivedConstants c{};
    std::tie(c.theta1_plus, c.theta2_plus) = characteristic_exponents(p.plus(), p.q());
    std::tie(c.theta1_minus, c.theta2_minus) = characteristic_exponents(p.minus(), p.q());
    const double t1p = c.theta1_plus, t2p = c.theta2_plus;
    const double t1m = c.theta1_minus, t2m = c.theta2_minus;
    const double a = p.a();

    c.c_minus = (t1m - t1p) / (t2m + t1m);
    c.c_plus = (t2p - t2m) / (t2p + t1p);
    c.Theta = c.c_plus * t1p * t1p + (1.0 - c.c_plus) * t2p * t2p;

    const double gm0 = c.c_minus * std::exp(-t2m * a) + (1.0 - c.c_minus) * std::exp(t1m * a);
    const double gp0 = std::exp(-t2m * a);
    const double h1 = gp0 - c.c_plus * gm0;
    const double x0_num = h1 * t1p * t1p;
    const double x0_den = (1.0 - c.c_plus) * gm0 * t2p * t2p;
    if (x0_num > 0.0 && x0_den > 0.0) c.x0 = std::log(x0_num / x0_den) / (t2p + t1p) + a;

    c.a1 = positive_log_ratio(t1m * t1m, t2m * t2m, t2m + t1m);
    c.a2 = positive_log_ratio(t2p + t1m, t2p - t2m, t1m + t2m);
    const double a3_num = (1.0 - c.c_minus * c.c_plus) * t1p * t1p
                          - (1.0 - c.c_plus) * c.c_minus * t2p * t2p;
    c.a3 = positive_log_ratio(a3_num, (1.0 - c.c_minus) * c.Theta, t1m + t2m);
    return c;
}

std::string to_string(SignRegime r) {
    switch (r) {
        case SignRegime::BothPositive: return "both-positive";
        case SignRegime::BothNonpositive: return "both-nonpositive";
        case SignRegime::MixedMinusPositive: return "mixed-minus-positive";
        case SignRegime::MixedPlusPositive: return "mixed-plus-positive";
    }
    return "unknown";
}

std::string to_string(const CaseLabel& c) {
    return c.sub.empty() ? to_string(c.regime) : to_string(c.regime) + "/" + c.sub;
}

std::vector<CaseLabel> matching_cases(const ModelParams& p, const DerivedConstants& c) {
    const double a = p.a();
    const bool mu_p = p.plus().mu > 0.0;
    const bool mu_m = p.minus().mu > 0.0;
    const bool cp = c.c_plus > 0.0;
    const bool Th = c.Theta > 0.0;
    const auto a1 = c.a1, a2 = c.a2, a3 = c.a3;
    std::vector<CaseLabel> out;

    if (mu_p && mu_m) {
        const auto R = SignRegime::BothPositive;
        if ((le(a2, a) && le(a, a1) && cp) || (le(a3, a) && le(a, opt_min(a1, a2)) && cp) ||
            (le(a3, a) && le(a, a1) && !cp && Th))
            out.push_back({R, "i"});
        if ((le(a, opt_min(a1, opt_min(a2, a3))) && cp) || (le(a, a1) && !cp && !Th) ||
            (le(a, opt_min(a1, a3)) && !cp && Th))
            out.push_back({R, "ii"});
        if ((le(opt_max(a1, a2), a) && cp) || (le(opt_max(a1, a3), a) && lt(a, a2) && cp) ||
            (le(opt_max(a1, a3), a) && !cp && Th))
            out.push_back({R, "iii"});
        if ((lt(a1, a) && lt(a, opt_min(a2, a3)) && cp) || (lt(a1, a) && !cp && !Th) ||
            (lt(a1, a) && lt(a, a3) && !cp && Th))
            out.push_back({R, "iv"});
    } else if (!mu_p && !mu_m) {
        out.push_back({SignRegime::BothNonpositive, ""});
    } else if (!mu_p && mu_m) {
        out.push_back({SignRegime::MixedMinusPositive, le(a, a1) ? "a-le-a1" : "a-gt-a1"});
    } else {
        const auto R = SignRegime::MixedPlusPositive;
        if ((cp && le(a2, a)) || (cp && le(a3, a) && le(a, a2)) || (!cp && le(a3, a) && Th))
            out.push_back({R, "i"});
        if ((cp && lt(a, opt_min(a2, a3))) || (!cp && !Th) || (!cp && lt(a, a3) && Th))
            out.push_back({R, "ii"});
    }
    return out;
}

CaseLabel classify_case(const ModelParams& p, const DerivedConstants& c) {
    auto all = matching_cases(p, c);
    if (all.empty()) {
        std::ostringstream os;
        os << "no case condition holds (a=" << p.a() << ", c_plus=" << c.c_plus
           << ", Theta=" << c.Theta << ")";
        throw NumericalError(os.str());
    }
    return all.front();
}

ConvexityProfile convexity_profile(const ModelParams& p, const DerivedConstants& c,
                                   const CaseLabel& label) {
    const double a = p.a();
    auto need = [](std::optional<double> v, const char* name) {
        if (!v) throw NumericalError(std::string("breakpoint ") + name + " is undefined");
        return *v;
    };
    switch (label.regime) {
        case SignRegime::BothNonpositive:
            return {{}, {+1}};
        case SignRegime::MixedMinusPositive:
            return {{std::min(a, need(c.a1, "a1"))}, {-1, +1}};
        case SignRegime::MixedPlusPositive:
            if (label.sub == "i") return {{}, {+1}};
            return {{a, need(c.x0, "x0")}, {+1, -1, +1}};
        case SignRegime::BothPositive:
            if (label.sub == "i") return {{a}, {-1, +1}};
            if (label.sub == "ii") return {{need(c.x0, "x0")}, {-1, +1}};
            if (label.sub == "iii") return {{need(c.a1, "a1")}, {-1, +1}};
            return {{need(c.a1, "a1"), a, need(c.x0, "x0")}, {-1, +1, -1, +1}};
    }
    throw NumericalError("unknown case label");
}

}  // namespace divopt
