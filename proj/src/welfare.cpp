#include "fairprice/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fairprice {

namespace {

void require_finite_mean(const DemandModel& model) {
    if (!model.finite_mean()) {
        throw Error(ErrorKind::Divergence,
                    model.describe() + ": welfare integrals diverge (mean is not finite)");
    }
}

bool closed_form(const DemandModel& model) {
    return model.distribution().survival_integral(0.0).has_value();
}

// Integral of (v - shift) f(v) over [lo, hi]; hi may be the support bound.
double moment_integral(const DemandModel& model, double lo, double hi, double shift,
                       const numerics::QuadConfig& quad) {
    lo = std::max(lo, 0.0);
    hi = std::min(hi, model.support().upper);
    if (!(hi > lo)) return 0.0;
    const auto integrand = [&](double v) { return (v - shift) * model.pdf(v); };
    return numerics::integrate(integrand, lo, hi, quad);
}

}  // namespace

void validate_band(const DemandModel& model, PriceBand band, double cost) {
    std::ostringstream os;
    os.precision(15);
    if (!std::isfinite(band.lower) || !std::isfinite(band.upper) || !std::isfinite(cost)) {
        os << "price band must be finite";
    } else if (cost < 0.0) {
        os << "marginal cost must be non-negative, got " << cost;
    } else if (band.lower < cost) {
        os << "lower price " << band.lower << " below marginal cost " << cost;
    } else if (band.upper < band.lower) {
        os << "upper price " << band.upper << " below lower price " << band.lower;
    } else if (band.upper > model.support().upper) {
        os << "upper price " << band.upper << " beyond the support bound " << model.support().upper;
    } else {
        return;
    }
    throw Error(ErrorKind::Domain, os.str());
}

double producer_surplus(const DemandModel& model, PriceBand band, double cost,
                        const numerics::QuadConfig& quad) {
    require_finite_mean(model);
    validate_band(model, band, cost);
    if (closed_form(model)) {
        // (p_u - c)S(p_u) + int_{p_l}^{p_u} (v - c) f, integrated by parts.
        return (band.lower - cost) * model.survival(band.lower) +
               model.survival_integral(band.lower) - model.survival_integral(band.upper);
    }
    return (band.upper - cost) * model.survival(band.upper) +
           moment_integral(model, band.lower, band.upper, cost, quad);
}

double consumer_surplus(const DemandModel& model, PriceBand band, double cost,
                        const numerics::QuadConfig& quad) {
    require_finite_mean(model);
    validate_band(model, band, cost);
    if (closed_form(model)) return model.survival_integral(band.upper);
    return moment_integral(model, band.upper, model.support().upper, band.upper, quad);
}

double total_surplus(const DemandModel& model, PriceBand band, double cost,
                     const numerics::QuadConfig& quad) {
    require_finite_mean(model);
    validate_band(model, band, cost);
    if (closed_form(model)) {
        return (band.lower - cost) * model.survival(band.lower) +
               model.survival_integral(band.lower);
    }
    return moment_integral(model, band.lower, model.support().upper, cost, quad);
}

double efficient_trade_surplus(const DemandModel& model, double cost,
                               const numerics::QuadConfig& quad) {
    require_finite_mean(model);
    if (!(cost >= 0.0) || !std::isfinite(cost)) {
        throw Error(ErrorKind::Domain, "marginal cost must be finite and non-negative");
    }
    if (cost >= model.support().upper) return 0.0;
    return model.survival_integral(cost, quad);
}

WelfareReport welfare_report(const DemandModel& model, PriceBand band, double cost,
                             const numerics::QuadConfig& quad) {
    WelfareReport r;
    r.band = band;
    r.cost = cost;
    r.ps = producer_surplus(model, band, cost, quad);
    r.cs = consumer_surplus(model, band, cost, quad);
    r.ts = total_surplus(model, band, cost, quad);
    const double gap = std::abs(r.cs + r.ps - r.ts);
    if (gap > kWelfareConsistencyLimit * std::max(1.0, std::abs(r.ts))) {
        std::ostringstream os;
        os << "welfare identity violated: |CS + PS - TS| = " << gap;
        throw Error(ErrorKind::Consistency, os.str());
    }
    return r;
}

}  // namespace fairprice
