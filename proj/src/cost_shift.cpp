#include <cmath>
#include <sstream>

#include "fairprice/solver.hpp"

namespace fairprice {

namespace {

class ShiftedDistribution final : public Distribution {
public:
    ShiftedDistribution(std::shared_ptr<const Distribution> base, double cost)
        : base_(std::move(base)), cost_(cost), mass_(base_->survival(cost)) {}

    Support support() const override { return {0.0, base_->support().upper - cost_}; }
    double pdf(double v) const override { return v < 0.0 ? 0.0 : base_->pdf(v + cost_) / mass_; }
    double survival(double v) const override {
        return v <= 0.0 ? 1.0 : base_->survival(v + cost_) / mass_;
    }
    double hazard(double v) const override { return v < 0.0 ? 0.0 : base_->hazard(v + cost_); }
    bool has_pdf_derivative() const override { return base_->has_pdf_derivative(); }
    double pdf_derivative(double v) const override {
        return v < 0.0 ? 0.0 : base_->pdf_derivative(v + cost_) / mass_;
    }
    std::optional<double> survival_integral(double x) const override {
        const double from = std::max(x, 0.0);
        const auto tail = base_->survival_integral(from + cost_);
        if (!tail) return std::nullopt;
        return *tail / mass_ + (from - x);
    }
    double inverse_survival(double s) const override {
        if (s >= 1.0) return 0.0;
        return std::max(0.0, base_->inverse_survival(s * mass_) - cost_);
    }
    bool finite_mean() const override { return base_->finite_mean(); }
    std::string describe() const override {
        std::ostringstream os;
        os.precision(15);
        os << "shifted(" << base_->describe() << ", c=" << cost_ << ")";
        return os.str();
    }

private:
    std::shared_ptr<const Distribution> base_;
    double cost_;
    double mass_;
};

}  // namespace

DemandModel cost_shift(const DemandModel& model, double cost) {
    if (!(cost >= 0.0) || !std::isfinite(cost)) {
        throw Error(ErrorKind::Domain, "cost shift: marginal cost must be finite and non-negative");
    }
    if (cost == 0.0) return model;
    if (!(model.survival(cost) > 0.0)) {
        throw Error(ErrorKind::EmptyMarket, "cost shift: no valuation exceeds the marginal cost");
    }
    return DemandModel(std::make_shared<ShiftedDistribution>(model.shared(), cost));
}

}  // namespace fairprice
