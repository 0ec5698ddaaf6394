#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairprice/demand.hpp"
#include "fairprice/solver.hpp"

namespace fairprice::cli {

/// Runs one CLI invocation; args exclude the program name. Returns the exit
/// status: 0 success, 2 configuration, 3 numeric/regularity, 4 data.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Tolerance overrides from FAIRPRICE_TOL: either one number (root abs/rel
/// tolerance) or comma-separated key=value pairs with keys root_abs,
/// root_rel, quad_abs, quad_rel.
SolverConfig config_from_env(const char* value);

/// Rounds to 15 significant digits, the precision of every emitted number.
double round15(double x);
/// "%.15g", with inf / -inf / nan spelled out.
std::string format15(double x);

nlohmann::json solution_json(const Solution& sol, const std::vector<std::string>& extra_warnings = {});
nlohmann::json regularity_json(const RegularityReport& report);

}  // namespace fairprice::cli
