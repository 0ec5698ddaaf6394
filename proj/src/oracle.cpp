#include "fairprice/oracle.hpp"

#include <cmath>
#include <limits>

namespace fairprice {

Solution brute_force_solve(const DemandModel& model, const Policy& policy, double cost,
                           const GridSpec& grid) {
    if (grid.n_points < 101) {
        throw Error(ErrorKind::Configuration, "oracle grid needs at least 101 points");
    }
    const double upper = grid.upper > 0.0 ? grid.upper : effective_upper(model);
    const double sup_upper = model.support().upper;

    const auto upper_price = [&](double p_l) {
        if (const auto* d = std::get_if<Difference>(&policy)) return p_l + d->epsilon;
        return cost + std::get<Ratio>(policy).gamma * (p_l - cost);
    };

    // Largest lower price whose partner price stays inside [cost, upper].
    double hi = upper;
    if (const auto* d = std::get_if<Difference>(&policy)) {
        hi = upper - d->epsilon;
    } else {
        hi = cost + (upper - cost) / std::get<Ratio>(policy).gamma;
    }
    double lo = cost;
    if (!(hi >= lo)) {
        throw Error(ErrorKind::PolicyRange, "oracle: no feasible band inside the grid");
    }

    double best_p = lo;
    double best_ps = -std::numeric_limits<double>::infinity();
    for (int pass = 0; pass <= grid.refinements; ++pass) {
        const int n = grid.n_points;
        const double step = (hi - lo) / (n - 1);
        for (int i = 0; i < n; ++i) {
            const double p_l = lo + step * i;
            const double p_u = std::min(upper_price(p_l), sup_upper);
            const double ps = producer_surplus(model, {p_l, p_u}, cost);
            if (ps > best_ps) {
                best_ps = ps;
                best_p = p_l;
            }
        }
        const double next_lo = std::max(lo, best_p - step);
        hi = std::min(hi, best_p + step);
        lo = next_lo;
        if (!(hi > lo)) break;
    }

    const PriceBand band{best_p, std::min(upper_price(best_p), sup_upper)};
    return Solution{policy, band, welfare_report(model, band, cost), std::nan(""), true, true, {}};
}

}  // namespace fairprice
