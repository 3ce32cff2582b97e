#pragma once

#include "divopt/model.hpp"

namespace divopt {

/// Which one-sided limit to take for quantities that jump at the threshold a.
enum class Side { Left, Right };

/// Scale functions of the two-regime diffusion and the exit functionals
/// built from them.
///
/// g_minus is decreasing and g_plus increasing; both solve the piecewise
/// ODE 0.5 s(x)^2 f'' + m(x) f' = q f and are C^1 at a.  g is the
/// combination vanishing at 0, normalized so that g'(0) > 0.
class ScaleContext {
public:
    explicit ScaleContext(const ModelParams& p);

    const ModelParams& params() const { return p_; }
    const DerivedConstants& constants() const { return c_; }

    /// Upper end of the supported evaluation domain.
    double x_max() const { return x_max_; }

    double g_minus(double x) const;
    double g_plus(double x) const;
    double g_minus_prime(double x) const;
    double g_plus_prime(double x) const;

    double g(double x) const;
    double g_prime(double x) const;
    /// At x == a the two regimes disagree; `side` picks the limit.
    double g_double_prime(double x, Side side) const;
    /// Same as above with Side::Left for x <= a.
    double g_double_prime(double x) const;

    /// E_x[e^{-q T_y}; T_y < T_z] for y <= x <= z.
    double exit_down(double x, double y, double z) const;
    /// E_x[e^{-q T_z}; T_z < T_y] for y <= x <= z.
    double exit_up(double x, double y, double z) const;

    /// g''(a+) with the sign flipped.
    double h2() const;

private:
    void check_domain(double x) const;

    ModelParams p_;
    DerivedConstants c_;
    double gm0_;      // g_minus(0)
    double gp0_;      // g_plus(0)
    double k_low_;    // g = k_low_ (e^{t2m x} - e^{-t1m x}) on x <= a
    double up_;       // coefficient of e^{t2p (x-a)} in g on x > a
    double down_;     // coefficient of -e^{-t1p (x-a)} in g on x > a
    double x_max_;
};

/// Upper bound on the optimal value started at x:
/// x + sum over regimes of (sqrt(mu^2 + 2 q sigma^2) + mu) / (2 q).
double value_upper_bound(const ModelParams& p, double x);

}  // namespace divopt
