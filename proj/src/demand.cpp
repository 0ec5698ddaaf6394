#include "fairprice/demand.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace fairprice {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(15);
    os << x;
    return os.str();
}

void require(bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorKind::Parameter, message);
}

class UniformDist final : public Distribution {
public:
    explicit UniformDist(double a) : a_(a) {}

    Support support() const override { return {0.0, a_}; }
    double pdf(double v) const override { return (v >= 0.0 && v <= a_) ? 1.0 / a_ : 0.0; }
    double survival(double v) const override {
        if (v <= 0.0) return 1.0;
        if (v >= a_) return 0.0;
        return (a_ - v) / a_;
    }
    double hazard(double v) const override {
        if (v < 0.0) return 0.0;
        return v < a_ ? 1.0 / (a_ - v) : numerics::kInf;
    }
    bool has_pdf_derivative() const override { return true; }
    double pdf_derivative(double) const override { return 0.0; }
    std::optional<double> survival_integral(double x) const override {
        if (x >= a_) return 0.0;
        if (x <= 0.0) return 0.5 * a_ - x;
        return (a_ - x) * (a_ - x) / (2.0 * a_);
    }
    double inverse_survival(double s) const override {
        if (s >= 1.0) return 0.0;
        if (s <= 0.0) return a_;
        return a_ * (1.0 - s);
    }
    std::string describe() const override { return "uniform(a=" + fmt(a_) + ")"; }

private:
    double a_;
};

class ExponentialDist final : public Distribution {
public:
    explicit ExponentialDist(double lambda) : lambda_(lambda) {}

    Support support() const override { return {}; }
    double pdf(double v) const override { return v >= 0.0 ? lambda_ * std::exp(-lambda_ * v) : 0.0; }
    double survival(double v) const override { return v <= 0.0 ? 1.0 : std::exp(-lambda_ * v); }
    double hazard(double v) const override { return v >= 0.0 ? lambda_ : 0.0; }
    bool has_pdf_derivative() const override { return true; }
    double pdf_derivative(double v) const override {
        return v >= 0.0 ? -lambda_ * lambda_ * std::exp(-lambda_ * v) : 0.0;
    }
    std::optional<double> survival_integral(double x) const override {
        if (x <= 0.0) return 1.0 / lambda_ - x;
        return std::exp(-lambda_ * x) / lambda_;
    }
    double inverse_survival(double s) const override {
        if (s >= 1.0) return 0.0;
        if (s <= 0.0) return numerics::kInf;
        return -std::log(s) / lambda_;
    }
    std::string describe() const override { return "exponential(lambda=" + fmt(lambda_) + ")"; }

private:
    double lambda_;
};

class PowerLawDist final : public Distribution {
public:
    PowerLawDist(double delta, double alpha) : delta_(delta), alpha_(alpha) {}

    Support support() const override { return {}; }
    double pdf(double v) const override {
        return v >= 0.0 ? alpha_ / (v + delta_) * survival(v) : 0.0;
    }
    double survival(double v) const override {
        return v <= 0.0 ? 1.0 : std::pow(delta_ / (v + delta_), alpha_);
    }
    double hazard(double v) const override { return v >= 0.0 ? alpha_ / (v + delta_) : 0.0; }
    bool has_pdf_derivative() const override { return true; }
    double pdf_derivative(double v) const override {
        return v >= 0.0 ? -(alpha_ + 1.0) / (v + delta_) * pdf(v) : 0.0;
    }
    std::optional<double> survival_integral(double x) const override {
        if (!finite_mean()) return std::nullopt;
        if (x <= 0.0) return delta_ / (alpha_ - 1.0) - x;
        return (x + delta_) * survival(x) / (alpha_ - 1.0);
    }
    double inverse_survival(double s) const override {
        if (s >= 1.0) return 0.0;
        if (s <= 0.0) return numerics::kInf;
        return delta_ * (std::pow(s, -1.0 / alpha_) - 1.0);
    }
    bool finite_mean() const override { return alpha_ > 1.0; }
    std::string describe() const override {
        return "powerlaw(delta=" + fmt(delta_) + ", alpha=" + fmt(alpha_) + ")";
    }

private:
    double delta_;
    double alpha_;
};

class TruncatedLogisticDist final : public Distribution {
public:
    TruncatedLogisticDist(double a, double b, std::string label)
        : a_(a), b_(b), norm_(sigmoid(a)), label_(std::move(label)) {}

    Support support() const override { return {}; }
    double pdf(double v) const override {
        if (v < 0.0) return 0.0;
        const double z = a_ + b_ * v;
        return -b_ * sigmoid(z) * sigmoid(-z) / norm_;
    }
    double survival(double v) const override {
        if (v <= 0.0) return 1.0;
        return sigmoid(a_ + b_ * v) / norm_;
    }
    double hazard(double v) const override {
        if (v < 0.0) return 0.0;
        return -b_ * sigmoid(-(a_ + b_ * v));
    }
    bool has_pdf_derivative() const override { return true; }
    double pdf_derivative(double v) const override {
        if (v < 0.0) return 0.0;
        const double z = a_ + b_ * v;
        const double sp = sigmoid(z);
        const double sm = sigmoid(-z);
        return -b_ * b_ * sp * sm * (sm - sp) / norm_;
    }
    std::optional<double> survival_integral(double x) const override {
        if (x <= 0.0) return softplus(a_) / (-b_ * norm_) - x;
        return softplus(a_ + b_ * x) / (-b_ * norm_);
    }
    double inverse_survival(double s) const override {
        if (s >= 1.0) return 0.0;
        if (s <= 0.0) return numerics::kInf;
        const double p = s * norm_;
        const double z = std::log(p) - std::log1p(-p);
        return (z - a_) / b_;
    }
    std::string describe() const override { return label_; }

private:
    double a_;
    double b_;
    double norm_;
    std::string label_;
};

class MixtureLogisticDist final : public Distribution {
public:
    MixtureLogisticDist(std::vector<double> intercepts, std::vector<double> weights, double beta)
        : beta_(beta) {
        std::map<double, double> merged;
        for (std::size_t i = 0; i < intercepts.size(); ++i) {
            merged[intercepts[i]] += weights.empty() ? 1.0 : weights[i];
        }
        double total = 0.0;
        for (const auto& [c, w] : merged) total += w;
        norm_ = 0.0;
        for (const auto& [c, w] : merged) {
            intercepts_.push_back(c);
            weights_.push_back(w / total);
            norm_ += (w / total) * sigmoid(c);
        }
    }

    Support support() const override { return {}; }
    double pdf(double v) const override {
        if (v < 0.0) return 0.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < intercepts_.size(); ++i) {
            const double z = intercepts_[i] + beta_ * v;
            acc += weights_[i] * sigmoid(z) * sigmoid(-z);
        }
        return -beta_ * acc / norm_;
    }
    double survival(double v) const override {
        if (v <= 0.0) return 1.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < intercepts_.size(); ++i) {
            acc += weights_[i] * sigmoid(intercepts_[i] + beta_ * v);
        }
        return acc / norm_;
    }
    double hazard(double v) const override {
        if (v < 0.0) return 0.0;
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < intercepts_.size(); ++i) {
            const double z = intercepts_[i] + beta_ * v;
            const double sp = sigmoid(z);
            num += weights_[i] * sp * sigmoid(-z);
            den += weights_[i] * sp;
        }
        return den > 0.0 ? -beta_ * num / den : -beta_;
    }
    bool has_pdf_derivative() const override { return true; }
    double pdf_derivative(double v) const override {
        if (v < 0.0) return 0.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < intercepts_.size(); ++i) {
            const double z = intercepts_[i] + beta_ * v;
            const double sp = sigmoid(z);
            const double sm = sigmoid(-z);
            acc += weights_[i] * sp * sm * (sm - sp);
        }
        return -beta_ * beta_ * acc / norm_;
    }
    std::optional<double> survival_integral(double x) const override {
        const double from = std::max(x, 0.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < intercepts_.size(); ++i) {
            acc += weights_[i] * softplus(intercepts_[i] + beta_ * from);
        }
        return acc / (-beta_ * norm_) + (from - x);
    }
    std::string describe() const override {
        return "mixture_logistic(components=" + std::to_string(intercepts_.size()) +
               ", beta=" + fmt(beta_) + ")";
    }

private:
    std::vector<double> intercepts_;
    std::vector<double> weights_;
    double beta_;
    double norm_ = 1.0;
};

}  // namespace

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) noexcept {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// ---------------------------------------------------------------------------

double Distribution::hazard(double v) const {
    const double s = survival(v);
    if (s <= 0.0) return numerics::kInf;
    return pdf(v) / s;
}

double Distribution::pdf_derivative(double) const {
    throw Error(ErrorKind::Capability, describe() + ": no closed-form density derivative");
}

std::optional<double> Distribution::survival_integral(double) const { return std::nullopt; }

double Distribution::inverse_survival(double s) const {
    const Support sup = support();
    if (s >= 1.0) return 0.0;
    if (s <= 0.0) return sup.upper;
    double lo = 0.0;
    double hi = sup.bounded() ? sup.upper : 1.0;
    while (!sup.bounded() && survival(hi) > s) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) return numerics::kInf;
    }
    for (int i = 0; i < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (survival(mid) > s ? lo : hi) = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------

DemandModel::DemandModel(std::shared_ptr<const Distribution> impl) : impl_(std::move(impl)) {
    if (!impl_) throw Error(ErrorKind::Parameter, "demand model: null distribution");
}

double DemandModel::virtual_value(double v) const {
    const Support sup = support();
    if (!(v >= sup.lower && v <= sup.upper)) {
        throw Error(ErrorKind::Domain, "virtual value: v=" + fmt(v) + " outside the support");
    }
    const double h = hazard(v);
    if (!(h > 0.0)) {
        throw Error(ErrorKind::Domain, "virtual value: zero density at v=" + fmt(v));
    }
    return std::isinf(h) ? v : v - 1.0 / h;
}

double DemandModel::quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw Error(ErrorKind::Domain, "quantile: probability outside [0, 1]");
    }
    return impl_->inverse_survival(1.0 - q);
}

double DemandModel::inverse_survival(double s) const {
    if (!(s >= 0.0 && s <= 1.0)) {
        throw Error(ErrorKind::Domain, "inverse survival: probability outside [0, 1]");
    }
    return impl_->inverse_survival(s);
}

double DemandModel::pdf_derivative(double v) const {
    if (!impl_->has_pdf_derivative()) {
        throw Error(ErrorKind::Capability, describe() + ": no closed-form density derivative");
    }
    return impl_->pdf_derivative(v);
}

std::optional<double> DemandModel::tail_partial_expectation(double x) const {
    const double from = std::max(x, 0.0);
    const auto tail = impl_->survival_integral(from);
    if (!tail) return std::nullopt;
    return from * survival(from) + *tail;
}

double DemandModel::survival_integral(double x, const numerics::QuadConfig& cfg) const {
    if (!finite_mean()) {
        throw Error(ErrorKind::Divergence, describe() + ": mean is not finite");
    }
    if (const auto closed = impl_->survival_integral(x)) return *closed;
    const double from = std::max(x, 0.0);
    const Support sup = support();
    if (from >= sup.upper) return 0.0;
    const auto s = [this](double v) { return survival(v); };
    return numerics::integrate(s, from, sup.upper, cfg) + (from - x);
}

// ---------------------------------------------------------------------------

DemandModel make_builtin(const BuiltinFamily& fam) {
    using namespace family;
    return std::visit(
        [](const auto& p) -> DemandModel {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                require(p.a > 0.0 && std::isfinite(p.a), "uniform: a must be positive");
                return DemandModel(std::make_shared<UniformDist>(p.a));
            } else if constexpr (std::is_same_v<T, Exponential>) {
                require(p.lambda > 0.0 && std::isfinite(p.lambda),
                        "exponential: lambda must be positive");
                return DemandModel(std::make_shared<ExponentialDist>(p.lambda));
            } else if constexpr (std::is_same_v<T, Logistic>) {
                require(p.s > 0.0 && std::isfinite(p.s) && std::isfinite(p.mu),
                        "logistic: s must be positive");
                return DemandModel(std::make_shared<TruncatedLogisticDist>(
                    p.mu / p.s, -1.0 / p.s, "logistic(s=" + fmt(p.s) + ", mu=" + fmt(p.mu) + ")"));
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                require(p.delta > 0.0 && p.alpha > 0.0 && std::isfinite(p.delta) &&
                            std::isfinite(p.alpha),
                        "powerlaw: delta and alpha must be positive");
                return DemandModel(std::make_shared<PowerLawDist>(p.delta, p.alpha));
            } else if constexpr (std::is_same_v<T, TruncatedLogistic>) {
                require(p.b < 0.0 && std::isfinite(p.a) && std::isfinite(p.b),
                        "truncated logistic: price coefficient b must be negative");
                return DemandModel(std::make_shared<TruncatedLogisticDist>(
                    p.a, p.b, "truncated_logistic(a=" + fmt(p.a) + ", b=" + fmt(p.b) + ")"));
            } else {
                require(p.beta < 0.0 && std::isfinite(p.beta),
                        "mixture logistic: beta must be negative");
                require(!p.intercepts.empty(), "mixture logistic: intercepts must be non-empty");
                for (double c : p.intercepts) {
                    require(std::isfinite(c), "mixture logistic: non-finite intercept");
                }
                require(p.weights.empty() || p.weights.size() == p.intercepts.size(),
                        "mixture logistic: weights must match intercepts");
                for (double w : p.weights) {
                    require(w > 0.0 && std::isfinite(w), "mixture logistic: weights must be positive");
                }
                return DemandModel(
                    std::make_shared<MixtureLogisticDist>(p.intercepts, p.weights, p.beta));
            }
        },
        fam);
}

DemandModel make_preset(const std::string& name) {
    if (name == "coke") return make_builtin(family::TruncatedLogistic{3.94, -3.44});
    if (name == "cake") return make_builtin(family::TruncatedLogistic{4.58, -3.72});
    throw Error(ErrorKind::Configuration, "unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"coke", "cake"}; }

double effective_upper(const DemandModel& model, double tail_mass) {
    if (!(tail_mass > 0.0 && tail_mass < 1.0)) {
        throw Error(ErrorKind::Configuration, "tail mass must lie in (0, 1)");
    }
    const Support sup = model.support();
    if (sup.bounded()) return sup.upper;
    return model.inverse_survival(tail_mass);
}

}  // namespace fairprice
