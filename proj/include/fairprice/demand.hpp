#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fairprice/error.hpp"
#include "fairprice/numerics.hpp"

namespace fairprice {

/// Willingness-to-pay support [0, upper]; upper may be +inf.
struct Support {
    double lower = 0.0;
    double upper = numerics::kInf;

    bool bounded() const noexcept { return upper < numerics::kInf; }
};

/// Extension point for willingness-to-pay distributions.
///
/// Implementations supply density and survival; everything else has a
/// generic fallback that subclasses override when a closed form exists.
class Distribution {
public:
    virtual ~Distribution() = default;

    virtual Support support() const = 0;
    virtual double pdf(double v) const = 0;
    virtual double survival(double v) const = 0;

    virtual double hazard(double v) const;
    virtual bool has_pdf_derivative() const { return false; }
    virtual double pdf_derivative(double v) const;

    /// Closed form of the integral of S over [x, U], when one exists.
    virtual std::optional<double> survival_integral(double x) const;

    /// Smallest v with S(v) <= s. Generic version bisects on S.
    virtual double inverse_survival(double s) const;

    virtual bool finite_mean() const { return true; }
    virtual std::string describe() const = 0;
};

/// Immutable, cheaply copyable handle to a distribution.
class DemandModel {
public:
    explicit DemandModel(std::shared_ptr<const Distribution> impl);

    Support support() const { return impl_->support(); }
    double pdf(double v) const { return impl_->pdf(v); }
    double survival(double v) const { return impl_->survival(v); }
    double cdf(double v) const { return 1.0 - impl_->survival(v); }
    double hazard(double v) const { return impl_->hazard(v); }

    /// w(v) = v - S(v)/f(v). Throws a domain error outside the support or where f = 0.
    double virtual_value(double v) const;

    double quantile(double q) const;
    double inverse_survival(double s) const;

    bool has_pdf_derivative() const { return impl_->has_pdf_derivative(); }
    /// Throws a capability error when the family has no closed-form f'.
    double pdf_derivative(double v) const;

    /// T(x) = integral of v f(v) over [x, U], only when a closed form exists.
    std::optional<double> tail_partial_expectation(double x) const;

    /// Integral of S over [x, U]: closed form when available, quadrature otherwise.
    double survival_integral(double x, const numerics::QuadConfig& cfg = {}) const;

    bool finite_mean() const { return impl_->finite_mean(); }
    std::string describe() const { return impl_->describe(); }

    const Distribution& distribution() const { return *impl_; }
    const std::shared_ptr<const Distribution>& shared() const { return impl_; }

private:
    std::shared_ptr<const Distribution> impl_;
};

namespace family {
struct Uniform {
    double a;
};
struct Exponential {
    double lambda;
};
/// Logistic valuation restricted to [0, inf) and renormalized.
struct Logistic {
    double s;
    double mu;
};
/// Power law with short-scale offset: f(v) = alpha Delta^alpha (v + Delta)^-(alpha+1).
struct PowerLaw {
    double delta;
    double alpha;
};
/// S(v) = sigma(a + b v) / sigma(a).
struct TruncatedLogistic {
    double a;
    double b;
};
/// S(v) proportional to the mean of sigma(c_i + beta v) over the intercepts.
struct MixtureLogistic {
    std::vector<double> intercepts;
    double beta;
    std::vector<double> weights = {};  // empty: one unit of mass per intercept
};
}  // namespace family

using BuiltinFamily = std::variant<family::Uniform, family::Exponential, family::Logistic,
                                   family::PowerLaw, family::TruncatedLogistic,
                                   family::MixtureLogistic>;

DemandModel make_builtin(const BuiltinFamily& family);

/// Named fitted-logistic presets ("coke", "cake").
DemandModel make_preset(const std::string& name);
std::vector<std::string> preset_names();

inline constexpr double kDefaultTailMass = 1e-12;

/// Finite upper bound with S(U_eff) <= tail_mass (the support bound when finite).
double effective_upper(const DemandModel& model, double tail_mass = kDefaultTailMass);

double sigmoid(double x) noexcept;
/// log(1 + e^x) without overflow.
double softplus(double x) noexcept;

// ---------------------------------------------------------------------------
// Regularity diagnostics

struct RegularityGrid {
    int n_points = 2001;
    double tail_mass = kDefaultTailMass;
    /// Right end of the grid; <= 0 selects effective_upper(model, tail_mass).
    double upper = 0.0;
};

struct MhrViolation {
    double v;
    double h;
    double h_next;
};

struct RegularitySample {
    double v;
    double hazard;
    double virtual_value;
};

struct RegularityReport {
    bool is_mhr = false;
    std::vector<MhrViolation> mhr_violations;  // first few offending cells
    int mhr_violation_count = 0;
    bool w_monotone = false;
    double w_limit = 0.0;                      // estimate of lim_{v->U} w(v)
    double k_strong_regular_up_to = -numerics::kInf;
    double k_requested = 0.0;
    bool k_strongly_regular = false;           // w_monotone and w_limit > k_requested
    RegularityGrid grid;
    double grid_upper = 0.0;
    std::vector<RegularitySample> samples;     // thinned (v, h, w) for plotting
};

inline constexpr double kMhrSlopeTolerance = 1e-6;

RegularityReport check_regularity(const DemandModel& model, double k,
                                  const RegularityGrid& grid = {});

}  // namespace fairprice
