#include "divopt/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "divopt/errors.hpp"

namespace divopt {

namespace {

double brent(const std::function<double(double)>& f, double a, double b, double fa, double fb,
             const RootOptions& opt) {
    const double eps = std::numeric_limits<double>::epsilon();
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < opt.max_iter; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * eps * std::fabs(b) + 0.5 * opt.x_tol;
        const double m = 0.5 * (c - b);
        if (std::fabs(m) <= tol || fb == 0.0) return b;
        if (std::fabs(e) >= tol && std::fabs(fa) > std::fabs(fb)) {
            double s = fb / fa, pp, qq;
            if (a == c) {
                pp = 2.0 * m * s;
                qq = 1.0 - s;
            } else {
                const double r = fb / fc, t = fa / fc;
                pp = s * (2.0 * m * t * (t - r) - (b - a) * (r - 1.0));
                qq = (t - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (pp > 0.0) qq = -qq; else pp = -pp;
            if (2.0 * pp < std::min(3.0 * m * qq - std::fabs(tol * qq), std::fabs(e * qq))) {
                e = d;
                d = pp / qq;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += std::fabs(d) > tol ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
    }
    throw NumericalError("Brent iteration did not converge");
}

}  // namespace

double invert_monotone(const std::function<double(double)>& f, double target, double lo, double hi,
                       Monotone dir, const RootOptions& opt) {
    if (!(lo <= hi)) throw NumericalError("invert_monotone: empty interval");
    auto h = [&](double x) { return f(x) - target; };
    const double flo = h(lo), fhi = h(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    const bool ok = dir == Monotone::Increasing ? (flo < 0.0 && fhi > 0.0) : (flo > 0.0 && fhi < 0.0);
    if (!ok) {
        std::ostringstream os;
        os.precision(17);
        os << "target " << target << " not bracketed on [" << lo << ", " << hi << "]: f(lo) = "
           << flo + target << ", f(hi) = " << fhi + target;
        throw BracketError(os.str(), lo, hi, flo + target, fhi + target);
    }
    return brent(h, lo, hi, flo, fhi, opt);
}

double clamped_inverse(const std::function<double(double)>& f, double target, double lo, double hi,
                       Monotone dir, const RootOptions& opt) {
    const double flo = f(lo), fhi = f(hi);
    if (dir == Monotone::Increasing) {
        if (target <= flo) return lo;
        if (target >= fhi) return hi;
    } else {
        if (target >= flo) return lo;
        if (target <= fhi) return hi;
    }
    auto h = [&](double x) { return f(x) - target; };
    return brent(h, lo, hi, flo - target, fhi - target, opt);
}

double integrate(const std::function<double(double)>& f, double lo, double hi, double rel_tol,
                 unsigned max_depth) {
    if (lo == hi) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, max_depth, rel_tol);
}

double first_nonnegative(const std::function<double(double)>& f, double lo, double hi, int n) {
    if (f(lo) >= 0.0) return lo;
    double prev = lo;
    for (int i = 1; i <= n; ++i) {
        const double x = i == n ? hi : lo + (hi - lo) * i / n;
        if (f(x) >= 0.0) {
            double l = prev, r = x;
            while (r - l > 1e-14 * std::max(1.0, std::fabs(r))) {
                const double m = 0.5 * (l + r);
                if (m <= l || m >= r) break;
                (f(m) >= 0.0 ? r : l) = m;
            }
            return r;
        }
        prev = x;
    }
    // f(hi) >= 0 holds in exact arithmetic; rounding may leave it a hair below.
    return hi;
}

}  // namespace divopt
