#pragma once

#include "fairprice/solver.hpp"

namespace fairprice {

struct GridSpec {
    int n_points = 4001;
    /// Right end of the lower-price grid; <= 0 selects effective_upper(model).
    double upper = 0.0;
    /// Zoom passes: each re-grids the two cells around the incumbent maximum.
    int refinements = 2;
};

/// Exhaustive grid search for the producer-surplus maximizing band along the
/// policy constraint. Uses no first-order conditions, so it serves as an
/// independent check on the solver. foc_residual is NaN in the result.
Solution brute_force_solve(const DemandModel& model, const Policy& policy, double cost,
                           const GridSpec& grid = {});

}  // namespace fairprice
