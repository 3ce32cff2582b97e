#pragma once

#include <functional>

namespace divopt {

enum class Monotone { Increasing, Decreasing };

struct RootOptions {
    double x_tol = 1e-13;  ///< absolute tolerance on the argument (added to 4 eps |x|)
    int max_iter = 200;
};

/// Solve f(x) = target on [lo, hi] for monotone f with Brent's method.
/// Throws BracketError when target is not between f(lo) and f(hi).
double invert_monotone(const std::function<double(double)>& f, double target, double lo, double hi,
                       Monotone dir, const RootOptions& opt = {});

/// Generalized inverse of a monotone branch on [lo, hi].  Targets beyond
/// the branch range clamp to the matching endpoint instead of throwing.
double clamped_inverse(const std::function<double(double)>& f, double target, double lo, double hi,
                       Monotone dir, const RootOptions& opt = {});

/// Adaptive Gauss-Kronrod (15 point) integral of f over [lo, hi].
/// Relative tolerance is taken against the L1 norm of f.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol = 1e-12, unsigned max_depth = 15);

/// First x in [lo, hi] with f(x) >= 0, given f(hi) >= 0.  Scans `n` cells
/// for the first sign change and bisects it.  Returns lo if f(lo) >= 0.
double first_nonnegative(const std::function<double(double)>& f, double lo, double hi, int n = 200);

}  // namespace divopt
