#include "fairprice/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fairprice::numerics {

void RootConfig::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_iter < 8) {
        throw Error(ErrorKind::Configuration,
                    "root config: tolerances must be positive and max_iter >= 8");
    }
}

void QuadConfig::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_depth < 1) {
        throw Error(ErrorKind::Configuration,
                    "quadrature config: tolerances must be positive and max_depth >= 1");
    }
}

double find_root_monotone(const ScalarFn& g, Bracket bracket, const RootConfig& cfg) {
    cfg.validate();
    double a = bracket.lo;
    double b = bracket.hi;
    double fa = g(a);
    double fb = g(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (std::isnan(fa) || std::isnan(fb) || std::signbit(fa) == std::signbit(fb)) {
        std::ostringstream os;
        os << "no sign change on [" << a << ", " << b << "]: g(lo)=" << fa << ", g(hi)=" << fb;
        throw Error(ErrorKind::Bracket, os.str());
    }

    // b is the best estimate, a the previous one, c the contrapoint.
    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (std::signbit(fb) == std::signbit(fc)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
                           0.5 * (cfg.abs_tol + cfg.rel_tol * std::abs(b));
        const double half = 0.5 * (c - b);
        if (std::abs(half) <= tol || fb == 0.0) return b;

        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double p;
            double q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            const double bound1 = 3.0 * half * q - std::abs(tol * q);
            const double bound2 = std::abs(e * q);
            if (2.0 * p < std::min(bound1, bound2)) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol) ? d : std::copysign(tol, half);
        fb = g(b);
        if (std::isnan(fb)) {
            throw Error(ErrorKind::Convergence, "root finder: function returned NaN");
        }
    }
    std::ostringstream os;
    os << "root finder did not converge in " << cfg.max_iter << " iterations";
    throw ConvergenceError(os.str(), Bracket{std::min(b, c), std::max(b, c)});
}

double integrate(const ScalarFn& f, double a, double b, const QuadConfig& cfg) {
    cfg.validate();
    if (b == a) return 0.0;
    if (!(b > a)) {
        throw Error(ErrorKind::Domain, "integrate: upper limit below lower limit");
    }
    using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err = 0.0;
    double l1 = 0.0;
    const auto depth = static_cast<unsigned>(cfg.max_depth);
    double value = 0.0;
    if (std::isinf(b)) {
        // v = a + e^y turns algebraic tails into exponential decay in y.
        const auto mapped = [&](double y) {
            const double s = std::exp(y);
            return s == 0.0 || std::isinf(s) ? 0.0 : f(a + s) * s;
        };
        value = Rule::integrate(mapped, -kInf, kInf, depth, cfg.rel_tol, &err, &l1);
    } else {
        value = Rule::integrate(f, a, b, depth, cfg.rel_tol, &err, &l1);
    }
    if (!std::isfinite(value)) {
        throw Error(ErrorKind::Divergence, "integrate: non-finite result");
    }
    if (err > std::max(cfg.abs_tol, cfg.rel_tol * l1)) {
        std::ostringstream os;
        os << "integrate: depth " << cfg.max_depth << " exhausted, error estimate " << err;
        throw AccuracyError(os.str(), value, err);
    }
    return value;
}

}  // namespace fairprice::numerics
