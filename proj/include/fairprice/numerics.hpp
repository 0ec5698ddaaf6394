#pragma once

#include <functional>
#include <limits>
#include <utility>

#include "fairprice/error.hpp"

namespace fairprice::numerics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct RootConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_iter = 200;

    void validate() const;
};

struct QuadConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-9;
    int max_depth = 15;

    void validate() const;
};

struct Bracket {
    double lo;
    double hi;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, Bracket last)
        : Error(ErrorKind::Convergence, what), last_(last) {}
    Bracket last_bracket() const noexcept { return last_; }

private:
    Bracket last_;
};

class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double estimate, double error)
        : Error(ErrorKind::Accuracy, what), estimate_(estimate), error_(error) {}
    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

using ScalarFn = std::function<double(double)>;

/// Root of a continuous function with a sign change on `bracket`.
///
/// Brent's method: inverse quadratic / secant steps are accepted only while
/// they stay inside the current bracket and shrink it fast enough, otherwise
/// the step falls back to bisection. Terminates when the bracket half-width
/// drops below abs_tol + rel_tol * |x| or an exact zero is hit.
double find_root_monotone(const ScalarFn& g, Bracket bracket, const RootConfig& cfg = {});

/// Adaptive Gauss-Kronrod quadrature of f over [a, b]; b may be +inf.
double integrate(const ScalarFn& f, double a, double b, const QuadConfig& cfg = {});

}  // namespace fairprice::numerics
