#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fairprice/demand.hpp"
#include "fairprice/welfare.hpp"

namespace fairprice {

/// Cap on the spread of personalized prices: p_u - p_l <= epsilon.
struct Difference {
    double epsilon;
};

/// Cap on the cost-adjusted ratio: p_u - c <= gamma (p_l - c).
struct Ratio {
    double gamma;
};

using Policy = std::variant<Difference, Ratio>;

enum class PolicyKind { Difference, Ratio };

PolicyKind kind_of(const Policy& policy) noexcept;
double parameter_of(const Policy& policy) noexcept;
Policy make_policy(PolicyKind kind, double parameter);
const char* to_string(PolicyKind kind) noexcept;

struct SolverConfig {
    // Tighter than the root finder defaults so first-order residuals stay below 1e-10.
    numerics::RootConfig root{1e-14, 1e-13, 200};
    numerics::QuadConfig quad{};
    double tail_mass = kDefaultTailMass;
    /// Cells in the sign-change scan that locates the first stationary point.
    int scan_cells = 64;
};

struct Solution {
    Policy policy;
    PriceBand band;
    WelfareReport welfare;
    double foc_residual = 0.0;
    bool binding = true;
    /// False when the scan saw more than one sign change of the first-order condition.
    bool unique = true;
    std::vector<std::string> warnings;
};

/// F -> F~ with f~(v) = f(v + c)/S(c): reduces a positive marginal cost to zero cost.
DemandModel cost_shift(const DemandModel& model, double cost);

/// Largest epsilon solved numerically; beyond it the perfect-discrimination limit is reported.
double max_difference(const DemandModel& model, double cost, const SolverConfig& cfg = {});
/// Largest gamma solved numerically.
double max_ratio(const DemandModel& model, double cost, const SolverConfig& cfg = {});

Solution solve_uniform_price(const DemandModel& model, double cost, const SolverConfig& cfg = {});
Solution solve_difference(const DemandModel& model, double epsilon, double cost,
                          const SolverConfig& cfg = {});
Solution solve_ratio(const DemandModel& model, double gamma, double cost,
                     const SolverConfig& cfg = {});
Solution solve(const DemandModel& model, const Policy& policy, double cost,
               const SolverConfig& cfg = {});

/// Root of eps - 2 (p_l*(eps) - c) = 0; above it p_u* and CS*_diff are monotone.
double epsilon_threshold(const DemandModel& model, double cost, const SolverConfig& cfg = {});

struct Sensitivity {
    double d_lower;
    double d_upper;
};

/// Implicit-function derivatives of the band endpoints w.r.t. epsilon or gamma.
Sensitivity sensitivity(const DemandModel& model, const Solution& solution, double cost);

struct SweepRow {
    double param;
    std::optional<Solution> solution;
    std::string error;  // empty when solution is set
};

struct SweepTable {
    PolicyKind kind;
    std::string model;
    double cost = 0.0;
    double efficient_trade = 0.0;
    std::vector<SweepRow> rows;

    std::size_t succeeded() const;
};

/// One independent solve per parameter; rows keep the parameter order.
/// threads = 0 picks std::thread::hardware_concurrency().
SweepTable sweep(const DemandModel& model, PolicyKind kind, const std::vector<double>& params,
                 double cost, const SolverConfig& cfg = {}, unsigned threads = 0);

std::vector<double> linspace(double from, double to, int steps);
std::vector<double> logspace(double from, double to, int steps);

struct DominanceRecord {
    double cs_level;
    double eps_matched;
    double gamma;
    double ps_diff;
    double ps_ratio;
    double ts_diff;
    double ts_ratio;
};

/// Matches CS*_ratio(gamma) with CS*_diff(eps) and records both welfare outcomes.
DominanceRecord dominance_compare(const DemandModel& model, double gamma, double cost,
                                  const SolverConfig& cfg = {});

}  // namespace fairprice
