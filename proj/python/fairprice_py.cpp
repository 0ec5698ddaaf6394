#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fairprice/ingest.hpp"
#include "fairprice/oracle.hpp"
#include "fairprice/solver.hpp"

namespace py = pybind11;
using namespace fairprice;

namespace {

py::dict solution_dict(const Solution& s) {
    py::dict d;
    d["policy"] = to_string(kind_of(s.policy));
    d["param"] = parameter_of(s.policy);
    d["cost"] = s.welfare.cost;
    d["p_l"] = s.band.lower;
    d["p_u"] = s.band.upper;
    d["ps"] = s.welfare.ps;
    d["cs"] = s.welfare.cs;
    d["ts"] = s.welfare.ts;
    d["foc_residual"] = s.foc_residual;
    d["binding"] = s.binding;
    d["unique"] = s.unique;
    d["warnings"] = s.warnings;
    return d;
}

py::dict regularity_dict(const RegularityReport& r) {
    py::list samples;
    for (const auto& s : r.samples) samples.append(py::make_tuple(s.v, s.hazard, s.virtual_value));
    py::dict d;
    d["is_mhr"] = r.is_mhr;
    d["mhr_violation_count"] = r.mhr_violation_count;
    d["w_monotone"] = r.w_monotone;
    d["w_limit"] = r.w_limit;
    d["k"] = r.k_requested;
    d["k_strongly_regular"] = r.k_strongly_regular;
    d["k_strong_regular_up_to"] = r.k_strong_regular_up_to;
    d["grid_upper"] = r.grid_upper;
    d["samples"] = samples;
    return d;
}

PolicyKind parse_kind(const std::string& name) {
    if (name == "diff") return PolicyKind::Difference;
    if (name == "ratio") return PolicyKind::Ratio;
    throw Error(ErrorKind::Configuration, "policy must be 'diff' or 'ratio', got '" + name + "'");
}

SolverConfig with_tail(double tail_mass) {
    SolverConfig cfg;
    cfg.tail_mass = tail_mass;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Optimal pricing under price-difference and price-ratio regulation";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result(
        [&]() { return py::object(py::exception<Error>(m, "FairpriceError", PyExc_ValueError)); });
    // Raised with args (kind, message) so callers can branch on the error class.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const py::tuple args = py::make_tuple(to_string(e.kind()), e.what());
            PyErr_SetObject(error_type.get_stored().ptr(), args.ptr());
        }
    });

    py::class_<DemandModel>(m, "DemandModel")
        .def("pdf", &DemandModel::pdf, py::arg("v"))
        .def("survival", &DemandModel::survival, py::arg("v"))
        .def("hazard", &DemandModel::hazard, py::arg("v"))
        .def("virtual_value", &DemandModel::virtual_value, py::arg("v"))
        .def("quantile", &DemandModel::quantile, py::arg("q"))
        .def("survival_integral",
             [](const DemandModel& d, double x) { return d.survival_integral(x); }, py::arg("x"))
        .def_property_readonly("support", [](const DemandModel& d) {
            return py::make_tuple(d.support().lower, d.support().upper);
        })
        .def_property_readonly("finite_mean", &DemandModel::finite_mean)
        .def("effective_upper",
             [](const DemandModel& d, double tail) { return effective_upper(d, tail); },
             py::arg("tail_mass") = kDefaultTailMass)
        .def("__repr__", &DemandModel::describe);

    m.def("uniform", [](double a) { return make_builtin(family::Uniform{a}); }, py::arg("a") = 1.0);
    m.def("exponential", [](double lambda) { return make_builtin(family::Exponential{lambda}); },
          py::arg("lam") = 1.0);
    m.def("logistic", [](double s, double mu) { return make_builtin(family::Logistic{s, mu}); },
          py::arg("s"), py::arg("mu"));
    m.def("power_law",
          [](double delta, double alpha) { return make_builtin(family::PowerLaw{delta, alpha}); },
          py::arg("delta") = 1.0, py::arg("alpha") = 2.0);
    m.def("truncated_logistic",
          [](double a, double b) { return make_builtin(family::TruncatedLogistic{a, b}); },
          py::arg("a"), py::arg("b"));
    m.def("mixture_logistic",
          [](std::vector<double> intercepts, double beta, std::vector<double> weights) {
              return make_builtin(family::MixtureLogistic{std::move(intercepts), beta, std::move(weights)});
          },
          py::arg("intercepts"), py::arg("beta"), py::arg("weights") = std::vector<double>{});
    m.def("preset", &make_preset, py::arg("name"));
    m.def("preset_names", &preset_names);
    m.def("load_model_file",
          [](const std::string& path) { return make_builtin(load_model_file(path)); }, py::arg("path"));
    m.def("cost_shift", &cost_shift, py::arg("model"), py::arg("cost"));

    m.def("check_regularity",
          [](const DemandModel& d, double k, int n_points, double tail_mass) {
              RegularityGrid grid;
              grid.n_points = n_points;
              grid.tail_mass = tail_mass;
              return regularity_dict(check_regularity(d, k, grid));
          },
          py::arg("model"), py::arg("k") = 0.0, py::arg("n_points") = 2001,
          py::arg("tail_mass") = kDefaultTailMass);

    m.def("welfare",
          [](const DemandModel& d, double p_l, double p_u, double cost) {
              const auto w = welfare_report(d, PriceBand{p_l, p_u}, cost);
              py::dict out;
              out["ps"] = w.ps;
              out["cs"] = w.cs;
              out["ts"] = w.ts;
              return out;
          },
          py::arg("model"), py::arg("p_l"), py::arg("p_u"), py::arg("cost") = 0.0);
    m.def("efficient_trade_surplus",
          [](const DemandModel& d, double cost) { return efficient_trade_surplus(d, cost); },
          py::arg("model"), py::arg("cost") = 0.0);

    m.def("solve_uniform_price",
          [](const DemandModel& d, double cost, double tail) {
              return solution_dict(solve_uniform_price(d, cost, with_tail(tail)));
          },
          py::arg("model"), py::arg("cost") = 0.0, py::arg("tail_mass") = kDefaultTailMass);
    m.def("solve_difference",
          [](const DemandModel& d, double eps, double cost, double tail) {
              return solution_dict(solve_difference(d, eps, cost, with_tail(tail)));
          },
          py::arg("model"), py::arg("epsilon"), py::arg("cost") = 0.0,
          py::arg("tail_mass") = kDefaultTailMass);
    m.def("solve_ratio",
          [](const DemandModel& d, double gamma, double cost, double tail) {
              return solution_dict(solve_ratio(d, gamma, cost, with_tail(tail)));
          },
          py::arg("model"), py::arg("gamma"), py::arg("cost") = 0.0,
          py::arg("tail_mass") = kDefaultTailMass);
    m.def("epsilon_threshold",
          [](const DemandModel& d, double cost) { return epsilon_threshold(d, cost); },
          py::arg("model"), py::arg("cost") = 0.0);
    m.def("sensitivity",
          [](const DemandModel& d, const std::string& policy, double param, double cost) {
              const auto sol = solve(d, make_policy(parse_kind(policy), param), cost);
              const auto s = sensitivity(d, sol, cost);
              return py::make_tuple(s.d_lower, s.d_upper);
          },
          py::arg("model"), py::arg("policy"), py::arg("param"), py::arg("cost") = 0.0);
    m.def("sweep",
          [](const DemandModel& d, const std::string& policy, const std::vector<double>& params,
             double cost, unsigned threads) {
              const SweepTable t = [&] {
                  py::gil_scoped_release release;
                  return sweep(d, parse_kind(policy), params, cost, {}, threads);
              }();
              py::list rows;
              for (const auto& row : t.rows) {
                  if (row.solution) {
                      rows.append(solution_dict(*row.solution));
                  } else {
                      py::dict failed;
                      failed["param"] = row.param;
                      failed["error"] = row.error;
                      rows.append(failed);
                  }
              }
              py::dict out;
              out["model"] = t.model;
              out["efficient_trade"] = t.efficient_trade;
              out["rows"] = rows;
              return out;
          },
          py::arg("model"), py::arg("policy"), py::arg("params"), py::arg("cost") = 0.0,
          py::arg("threads") = 0u);
    m.def("dominance_compare",
          [](const DemandModel& d, double gamma, double cost) {
              const auto r = dominance_compare(d, gamma, cost);
              py::dict out;
              out["gamma"] = r.gamma;
              out["cs_level"] = r.cs_level;
              out["eps_matched"] = r.eps_matched;
              out["ps_diff"] = r.ps_diff;
              out["ps_ratio"] = r.ps_ratio;
              out["ts_diff"] = r.ts_diff;
              out["ts_ratio"] = r.ts_ratio;
              return out;
          },
          py::arg("model"), py::arg("gamma"), py::arg("cost") = 0.0);
    m.def("brute_force_solve",
          [](const DemandModel& d, const std::string& policy, double param, double cost,
             int n_points) {
              GridSpec grid;
              grid.n_points = n_points;
              return solution_dict(brute_force_solve(d, make_policy(parse_kind(policy), param), cost, grid));
          },
          py::arg("model"), py::arg("policy"), py::arg("param"), py::arg("cost") = 0.0,
          py::arg("n_points") = 4001);

    m.def("loan_price", &loan_price, py::arg("monthly_payment"), py::arg("term"),
          py::arg("loan_amount"), py::arg("rate") = kDefaultLoanRate);
    m.def("fit_logistic",
          [](const std::vector<double>& prices, const std::vector<bool>& bought,
             const std::vector<std::vector<double>>& covariates) {
              if (prices.size() != bought.size() ||
                  (!covariates.empty() && covariates.size() != prices.size())) {
                  throw Error(ErrorKind::Data, "prices, bought and covariates differ in length");
              }
              std::vector<PurchaseRecord> recs;
              recs.reserve(prices.size());
              for (std::size_t i = 0; i < prices.size(); ++i) {
                  recs.push_back({prices[i], bought[i],
                                  covariates.empty() ? std::vector<double>{} : covariates[i]});
              }
              const LogisticFit fit = fit_logistic(recs, !covariates.empty());
              py::dict out;
              out["intercept"] = fit.intercept;
              out["price_coef"] = fit.price_coef;
              out["covariate_coefs"] = fit.covariate_coefs;
              out["log_likelihood"] = fit.log_likelihood;
              out["converged"] = fit.converged;
              out["iterations"] = fit.iterations;
              out["model"] = to_demand(fit, recs);
              return out;
          },
          py::arg("prices"), py::arg("bought"),
          py::arg("covariates") = std::vector<std::vector<double>>{});
}
