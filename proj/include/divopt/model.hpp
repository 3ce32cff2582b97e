#pragma once

#include <optional>
#include <utility>
#include <string>
#include <vector>

namespace divopt {

/// Drift and volatility of the surplus in one regime.
struct Regime {
    double mu;
    double sigma;
};

/// Two-regime surplus model with a threshold switch and fixed dividend cost.
///
/// Surplus follows dX = mu(X) dt + sigma(X) dW with (mu, sigma) = minus
/// regime on x <= a and plus regime on x > a.  Every dividend payment costs
/// beta.  Values are discounted at rate q.
class ModelParams {
public:
    /// Throws ConfigError unless sigma > 0, a > 0, q > 0, beta > 0 and the
    /// exponents stay representable in double precision.
    ModelParams(Regime plus, Regime minus, double a, double q, double beta);

    const Regime& plus() const { return plus_; }
    const Regime& minus() const { return minus_; }
    double a() const { return a_; }
    double q() const { return q_; }
    double beta() const { return beta_; }

    double mu(double x) const { return x <= a_ ? minus_.mu : plus_.mu; }
    double sigma(double x) const { return x <= a_ ? minus_.sigma : plus_.sigma; }

    ModelParams with_beta(double beta) const { return {plus_, minus_, a_, q_, beta}; }

private:
    Regime plus_;
    Regime minus_;
    double a_;
    double q_;
    double beta_;
};

/// Closed-form constants of the scale function and of the case split.
///
/// Breakpoints a1, a2, a3 are kept only when they land in (0, inf); x0 is
/// kept whenever its logarithm is defined.  The remaining levels depend on
/// inverting g' and are filled in by the solver.
struct DerivedConstants {
    double theta1_plus, theta2_plus;
    double theta1_minus, theta2_minus;
    double c_minus, c_plus;
    double Theta;
    std::optional<double> x0;
    std::optional<double> a1, a2, a3;
    std::optional<double> a4, a5, a6, a7;
    std::optional<double> x1, x2, x3, x4;
};

/// Positive and negative roots (theta1, theta2) of 0.5 s^2 t^2 + mu t - q = 0,
/// returned as t = theta2 and t = -theta1.
std::pair<double, double> characteristic_exponents(const Regime& r, double q);

DerivedConstants derive_constants(const ModelParams& p);

enum class SignRegime { BothPositive, BothNonpositive, MixedMinusPositive, MixedPlusPositive };

/// Case label.  `sub` is one of "i".."iv" for BothPositive, "a-le-a1" or
/// "a-gt-a1" for MixedMinusPositive, "i" or "ii" for MixedPlusPositive and
/// empty for BothNonpositive.
struct CaseLabel {
    SignRegime regime;
    std::string sub;
    bool operator==(const CaseLabel&) const = default;
};

std::string to_string(SignRegime r);
std::string to_string(const CaseLabel& c);

/// Every sub-case whose defining condition holds.  Normally one entry;
/// classify() takes the first.
std::vector<CaseLabel> matching_cases(const ModelParams& p, const DerivedConstants& c);

CaseLabel classify_case(const ModelParams& p, const DerivedConstants& c);

/// Sign pattern of g'' on the intervals cut out by the breakpoints.
/// signs.size() == breakpoints.size() + 1, each entry -1 or +1.
struct ConvexityProfile {
    std::vector<double> breakpoints;
    std::vector<int> signs;
};

ConvexityProfile convexity_profile(const ModelParams& p, const DerivedConstants& c,
                                   const CaseLabel& label);

}  // namespace divopt
