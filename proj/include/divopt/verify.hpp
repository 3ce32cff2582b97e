#pragma once

#include <string>
#include <vector>

#include "divopt/scale.hpp"
#include "divopt/solver.hpp"

namespace divopt {

/// Value of the (z1, z2) impulse strategy: pay X - z1 whenever X reaches z2.
///
/// Solver pairs satisfy psi(z1, z2) = beta; V then equals g(x)/g'(z2)
/// below z2 and is C^1 there.  Other pairs use the general normalization
/// (z2 - z1 - beta) / (g(z2) - g(z1)).
class ValueFunction {
public:
    ValueFunction(const ScaleContext& ctx, BarrierPair pair);

    const ScaleContext& context() const { return ctx_; }
    BarrierPair pair() const { return pair_; }
    bool first_order() const { return first_order_; }
    double normalization() const { return norm_; }

    /// V(x); 0 for x < 0.
    double operator()(double x) const;
    double derivative(double x) const;
    double second_derivative(double x, Side side) const;
    /// (A - q) V at x, with `side` choosing the regime at x == a.
    double generator(double x, Side side) const;

private:
    const ScaleContext& ctx_;
    BarrierPair pair_;
    bool first_order_;
    double norm_;
    double tail_offset_;  // V(x) = tail_offset_ + x on x >= z2
};

/// Check points on (0, x_hi], clustered around 0, a, z1 and z2 and kept at
/// least 1e-7 away from a and z2.
std::vector<double> verification_grid(const ScaleContext& ctx, BarrierPair pair, double x_hi, int n = 1000);

struct IncrementCheck {
    double min_slack;
    double x, y;  ///< where the minimum sits
};

/// Minimum of V(x) - V(y) - (x - y - beta) over grid pairs 0 <= y <= x <= 2 z2.
IncrementCheck check_increment_inequality(const ValueFunction& vf, int grid_size = 400);

struct QviCheck {
    double interior_residual;  ///< max |(A - q) V| on (0, z2) minus {a}
    double tail_max;           ///< max (A - q) V on (z2, x_hi]
    double tail_argmax;
    int points;
};

QviCheck check_qvi(const ValueFunction& vf, const std::vector<double>& grid);

enum class Verdict { OptimalProven, NotProven };

struct VerificationReport {
    BarrierPair pair;
    bool first_order;
    bool condition_a;
    bool condition_b;
    double condition_b_residual;  ///< mu_+ - q (a - z2 + g(z2)/g'(z2))
    bool condition_c;
    double g2_at_a_plus;          ///< g''(a+)
    bool slope_ratio_ok;          ///< g(a)/g'(a) <= g(z2)/g'(z2) + a - z2 when z2 <= a
    double interior_residual;
    double interior_tolerance;
    double qvi_max_residual;
    double increment_min_slack;
    double value_at_z2;
    Verdict verdict;
    std::string reason;
};

VerificationReport check_conditions(const ValueFunction& vf);

std::string to_string(Verdict v);

/// Flat "key=value" lines.
std::string to_key_value(const VerificationReport& r);

}  // namespace divopt
