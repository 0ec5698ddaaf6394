#pragma once

#include "fairprice/demand.hpp"

namespace fairprice {

/// Piecewise pricing strategy: charge `lower` to valuations below it, the
/// valuation itself inside the band, and `upper` above it.
struct PriceBand {
    double lower;
    double upper;

    double width() const noexcept { return upper - lower; }
};

struct WelfareReport {
    PriceBand band;
    double cost = 0.0;
    double ps = 0.0;
    double cs = 0.0;
    double ts = 0.0;
};

/// Relative tolerance for the CS + PS = TS identity.
inline constexpr double kWelfareTolerance = 1e-8;
/// Beyond this the report refuses to return (quadrature misconfiguration).
inline constexpr double kWelfareConsistencyLimit = 1e-7;

double producer_surplus(const DemandModel& model, PriceBand band, double cost,
                        const numerics::QuadConfig& quad = {});
double consumer_surplus(const DemandModel& model, PriceBand band, double cost,
                        const numerics::QuadConfig& quad = {});
double total_surplus(const DemandModel& model, PriceBand band, double cost,
                     const numerics::QuadConfig& quad = {});

/// E[1{V >= c}(V - c)], the upper bound on total surplus.
double efficient_trade_surplus(const DemandModel& model, double cost,
                               const numerics::QuadConfig& quad = {});

WelfareReport welfare_report(const DemandModel& model, PriceBand band, double cost,
                             const numerics::QuadConfig& quad = {});

/// Throws a domain error unless cost <= lower <= upper <= support upper.
void validate_band(const DemandModel& model, PriceBand band, double cost);

}  // namespace fairprice
