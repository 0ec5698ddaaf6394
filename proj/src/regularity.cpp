#include <algorithm>
#include <cmath>

#include "fairprice/demand.hpp"

namespace fairprice {

namespace {

constexpr std::size_t kMaxRecordedViolations = 64;
constexpr std::size_t kMaxSamples = 201;

// w(v) far out in the tail. Closed-form hazards keep this finite where S and f
// both underflow.
double tail_virtual_value(const DemandModel& model, double v) {
    const double h = model.hazard(v);
    if (std::isinf(h)) return v;
    return h > 0.0 ? v - 1.0 / h : -numerics::kInf;
}

}  // namespace

RegularityReport check_regularity(const DemandModel& model, double k, const RegularityGrid& grid) {
    if (grid.n_points < 16) {
        throw Error(ErrorKind::Configuration, "regularity grid needs at least 16 points");
    }
    RegularityReport report;
    report.grid = grid;
    report.k_requested = k;

    const Support sup = model.support();
    const double upper = grid.upper > 0.0 ? std::min(grid.upper, sup.upper)
                                          : effective_upper(model, grid.tail_mass);
    report.grid_upper = upper;

    const int n = grid.n_points;
    std::vector<double> v(n), h(n), w(n);
    for (int i = 0; i < n; ++i) {
        v[i] = upper * static_cast<double>(i) / static_cast<double>(n - 1);
        h[i] = model.hazard(v[i]);
        w[i] = tail_virtual_value(model, v[i]);
    }

    report.w_monotone = true;
    for (int i = 0; i + 1 < n; ++i) {
        const double slope_floor = -kMhrSlopeTolerance * std::max(1.0, h[i]);
        if (!(h[i + 1] - h[i] >= slope_floor) && !(std::isinf(h[i + 1]) && h[i + 1] > 0.0)) {
            ++report.mhr_violation_count;
            if (report.mhr_violations.size() < kMaxRecordedViolations) {
                report.mhr_violations.push_back({v[i], h[i], h[i + 1]});
            }
        }
        if (!(w[i + 1] > w[i])) report.w_monotone = false;
    }
    report.is_mhr = report.mhr_violation_count == 0;

    if (sup.bounded()) {
        report.w_limit = w[n - 1];
    } else {
        // Linear growth of w in the far tail certifies an infinite limit.
        const double w1 = tail_virtual_value(model, upper);
        const double w2 = tail_virtual_value(model, 2.0 * upper);
        report.w_limit = (w2 - w1) > 1e-3 * upper ? numerics::kInf : std::max(w1, w2);
    }
    if (report.w_monotone) report.k_strong_regular_up_to = report.w_limit;
    report.k_strongly_regular = report.w_monotone && report.w_limit > k;

    const int stride = std::max(1, (n - 1) / static_cast<int>(kMaxSamples - 1));
    for (int i = 0; i < n; i += stride) report.samples.push_back({v[i], h[i], w[i]});
    if ((n - 1) % stride != 0) report.samples.push_back({v[n - 1], h[n - 1], w[n - 1]});
    return report;
}

}  // namespace fairprice
