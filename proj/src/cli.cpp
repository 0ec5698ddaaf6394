#include "fairprice/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fairprice/ingest.hpp"

namespace fairprice::cli {

namespace {

using nlohmann::json;

json num(double x) {
    if (std::isfinite(x)) return round15(x);
    return format15(x);
}

void round_numbers(json& doc) {
    if (doc.is_number_float()) {
        doc = num(doc.get<double>());
    } else if (doc.is_structured()) {
        for (auto& item : doc) round_numbers(item);
    }
}

struct ModelArgs {
    std::string dist;
    double a = 1.0;
    double lambda = 1.0;
    double s = 1.0;
    double mu = 0.0;
    double delta = 1.0;
    double alpha = 2.0;
    std::string preset;
    std::string model_file;
    double cost = 0.0;
    double tail_mass = kDefaultTailMass;
    int grid_points = 2001;
    std::string out;
    std::string format;
};

void add_model_options(CLI::App* cmd, ModelArgs& m) {
    cmd->add_option("--dist", m.dist, "Built-in family")
        ->check(CLI::IsMember({"uniform", "exponential", "logistic", "powerlaw"}));
    cmd->add_option("--a", m.a, "Uniform upper bound");
    cmd->add_option("--lambda", m.lambda, "Exponential rate");
    cmd->add_option("--s", m.s, "Logistic scale");
    cmd->add_option("--mu", m.mu, "Logistic location");
    cmd->add_option("--delta", m.delta, "Power-law short scale");
    cmd->add_option("--alpha", m.alpha, "Power-law exponent");
    cmd->add_option("--preset", m.preset, "Fitted preset")->check(CLI::IsMember(preset_names()));
    cmd->add_option("--model-file", m.model_file, "Model file written by 'fit'");
    cmd->add_option("--cost", m.cost, "Marginal cost");
    cmd->add_option("--tail-mass", m.tail_mass, "Tail mass defining the effective support");
    cmd->add_option("--grid-points", m.grid_points, "Points in diagnostic / oracle grids");
    cmd->add_option("--out", m.out, "Output path (default stdout)");
}

DemandModel build_model(const ModelArgs& m) {
    const int sources = !m.dist.empty() + !m.preset.empty() + !m.model_file.empty();
    if (sources != 1) {
        throw Error(ErrorKind::Configuration,
                    "exactly one of --dist, --preset, --model-file is required");
    }
    if (!m.preset.empty()) return make_preset(m.preset);
    if (!m.model_file.empty()) return make_builtin(load_model_file(m.model_file));
    if (m.dist == "uniform") return make_builtin(family::Uniform{m.a});
    if (m.dist == "exponential") return make_builtin(family::Exponential{m.lambda});
    if (m.dist == "logistic") return make_builtin(family::Logistic{m.s, m.mu});
    return make_builtin(family::PowerLaw{m.delta, m.alpha});
}

void emit(const ModelArgs& m, const std::string& text, std::ostream& out) {
    if (m.out.empty()) {
        out << text;
        return;
    }
    const std::string tmp = m.out + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::Configuration, "cannot write " + tmp);
        f << text;
        if (!f) throw Error(ErrorKind::Configuration, "write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), m.out.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw Error(ErrorKind::Configuration, "cannot move output into " + m.out);
    }
}

PolicyKind parse_kind(const std::string& policy) {
    return policy == "ratio" ? PolicyKind::Ratio : PolicyKind::Difference;
}

std::vector<std::string> regularity_warnings(const DemandModel& model, const ModelArgs& m) {
    RegularityGrid grid;
    grid.n_points = std::max(m.grid_points, 16);
    grid.tail_mass = m.tail_mass;
    const auto report = check_regularity(cost_shift(model, m.cost), 0.0, grid);
    if (report.k_strongly_regular) return {};
    return {"demand is not certified cost-strongly regular on the diagnostic grid; "
            "the optimum may not be unique"};
}

std::string csv_header_comment(const ModelArgs& m, const DemandModel& model,
                               const SolverConfig& cfg, const std::string& extra) {
    std::ostringstream os;
    os << "# model=" << model.describe() << "; cost=" << format15(m.cost)
       << "; tail_mass=" << format15(cfg.tail_mass) << "; root_abs_tol=" << format15(cfg.root.abs_tol)
       << "; root_rel_tol=" << format15(cfg.root.rel_tol) << "; quad_rel_tol="
       << format15(cfg.quad.rel_tol) << extra << "\n";
    return os.str();
}

std::vector<double> param_grid(const std::vector<double>& explicit_params, double from, double to,
                               int steps, bool log, bool have_range) {
    if (!explicit_params.empty()) return explicit_params;
    if (!have_range) {
        throw Error(ErrorKind::Configuration, "give --params or --from/--to/--steps");
    }
    return log ? logspace(from, to, steps) : linspace(from, to, steps);
}

}  // namespace

double round15(double x) {
    if (!std::isfinite(x)) return x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return std::strtod(buf, nullptr);
}

std::string format15(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

SolverConfig config_from_env(const char* value) {
    SolverConfig cfg;
    if (value == nullptr || *value == '\0') return cfg;
    const auto parse = [](const std::string& s) {
        try {
            std::size_t used = 0;
            const double x = std::stod(s, &used);
            if (used == s.size() && x > 0.0) return x;
        } catch (const std::exception&) {
        }
        throw Error(ErrorKind::Configuration, "FAIRPRICE_TOL: bad tolerance '" + s + "'");
    };
    const std::string text(value);
    if (text.find('=') == std::string::npos) {
        cfg.root.abs_tol = cfg.root.rel_tol = parse(text);
        return cfg;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Configuration, "FAIRPRICE_TOL: expected key=value, got '" + item + "'");
        }
        const std::string key = item.substr(0, eq);
        const double x = parse(item.substr(eq + 1));
        if (key == "root_abs") cfg.root.abs_tol = x;
        else if (key == "root_rel") cfg.root.rel_tol = x;
        else if (key == "quad_abs") cfg.quad.abs_tol = x;
        else if (key == "quad_rel") cfg.quad.rel_tol = x;
        else throw Error(ErrorKind::Configuration, "FAIRPRICE_TOL: unknown key '" + key + "'");
    }
    return cfg;
}

json solution_json(const Solution& sol, const std::vector<std::string>& extra_warnings) {
    std::vector<std::string> warnings = extra_warnings;
    warnings.insert(warnings.end(), sol.warnings.begin(), sol.warnings.end());
    return {{"policy", to_string(kind_of(sol.policy))},
            {"param", num(parameter_of(sol.policy))},
            {"cost", num(sol.welfare.cost)},
            {"p_l", num(sol.band.lower)},
            {"p_u", num(sol.band.upper)},
            {"ps", num(sol.welfare.ps)},
            {"cs", num(sol.welfare.cs)},
            {"ts", num(sol.welfare.ts)},
            {"foc_residual", num(sol.foc_residual)},
            {"binding", sol.binding},
            {"unique", sol.unique},
            {"warnings", warnings}};
}

json regularity_json(const RegularityReport& r) {
    json violations = json::array();
    for (const auto& v : r.mhr_violations) {
        violations.push_back({{"v", num(v.v)}, {"h", num(v.h)}, {"h_next", num(v.h_next)}});
    }
    json samples = json::array();
    for (const auto& s : r.samples) {
        samples.push_back({{"v", num(s.v)}, {"hazard", num(s.hazard)},
                           {"virtual_value", num(s.virtual_value)}});
    }
    return {{"is_mhr", r.is_mhr},
            {"mhr_violation_count", r.mhr_violation_count},
            {"mhr_violations", violations},
            {"w_monotone", r.w_monotone},
            {"w_limit", num(r.w_limit)},
            {"k", num(r.k_requested)},
            {"k_strongly_regular", r.k_strongly_regular},
            {"k_strong_regular_up_to", num(r.k_strong_regular_up_to)},
            {"grid", {{"n_points", r.grid.n_points},
                      {"lower", 0.0},
                      {"upper", num(r.grid_upper)},
                      {"tail_mass", num(r.grid.tail_mass)},
                      {"slope_tolerance", kMhrSlopeTolerance}}},
            {"samples", samples}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal personalized pricing under price-difference and price-ratio caps", "fairprice"};
    app.require_subcommand(1);
    ModelArgs m;

    std::string policy = "diff";
    double eps = 0.0;
    double gamma = 1.0;
    std::vector<double> params;
    double from = 0.0;
    double to = 0.0;
    int steps = 11;
    bool log_grid = false;
    double k = 0.0;
    std::string format = "csv";

    auto* solve_cmd = app.add_subcommand("solve", "Solve one regulated pricing problem");
    add_model_options(solve_cmd, m);
    solve_cmd->add_option("--policy", policy)->check(CLI::IsMember({"diff", "ratio"}));
    auto* eps_opt = solve_cmd->add_option("--eps", eps, "Price-difference cap");
    auto* gamma_opt = solve_cmd->add_option("--gamma", gamma, "Price-ratio cap");

    auto* sweep_cmd = app.add_subcommand("sweep", "Trade-off curve over regulatory intensity");
    add_model_options(sweep_cmd, m);
    sweep_cmd->add_option("--policy", policy)->check(CLI::IsMember({"diff", "ratio"}));
    sweep_cmd->add_option("--params", params, "Explicit parameter list")->delimiter(',');
    auto* from_opt = sweep_cmd->add_option("--from", from);
    sweep_cmd->add_option("--to", to);
    sweep_cmd->add_option("--steps", steps);
    sweep_cmd->add_flag("--log", log_grid, "Log-spaced grid");
    sweep_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

    auto* check_cmd = app.add_subcommand("check", "Regularity diagnostics");
    add_model_options(check_cmd, m);
    check_cmd->add_option("--k", k, "Strong-regularity level to certify");

    auto* threshold_cmd = app.add_subcommand("threshold", "Epsilon threshold eps0");
    add_model_options(threshold_cmd, m);

    auto* dom_cmd = app.add_subcommand("dominance", "Difference vs ratio at matched consumer surplus");
    add_model_options(dom_cmd, m);
    dom_cmd->add_option("--gamma", params, "Gamma values")->delimiter(',');
    auto* dom_from = dom_cmd->add_option("--from", from);
    dom_cmd->add_option("--to", to);
    dom_cmd->add_option("--steps", steps);
    dom_cmd->add_flag("--log", log_grid);

    std::string csv_path;
    std::string price_col = "price";
    std::string bought_col = "bought";
    std::vector<std::string> covariates;
    bool loan = false;
    LoanColumns loan_cols;
    std::string save_model;
    auto* fit_cmd = app.add_subcommand("fit", "Fit logistic demand from purchase data");
    fit_cmd->add_option("--csv", csv_path)->required();
    fit_cmd->add_option("--price-col", price_col);
    fit_cmd->add_option("--bought-col", bought_col);
    fit_cmd->add_option("--covariates", covariates)->delimiter(',');
    fit_cmd->add_flag("--loan-price", loan, "Derive price as loan NPV minus amount");
    fit_cmd->add_option("--payment-col", loan_cols.payment);
    fit_cmd->add_option("--term-col", loan_cols.term);
    fit_cmd->add_option("--amount-col", loan_cols.amount);
    fit_cmd->add_option("--rate", loan_cols.rate);
    fit_cmd->add_option("--save-model", save_model);
    fit_cmd->add_option("--out", m.out);

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << json{{"error", "configuration"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }

    try {
        const SolverConfig cfg_base = config_from_env(std::getenv("FAIRPRICE_TOL"));
        SolverConfig cfg = cfg_base;
        cfg.tail_mass = m.tail_mass;

        if (solve_cmd->parsed()) {
            const DemandModel model = build_model(m);
            const PolicyKind kind = parse_kind(policy);
            if (kind == PolicyKind::Difference && gamma_opt->count() > 0) {
                throw Error(ErrorKind::Configuration, "--gamma given with --policy diff");
            }
            if (kind == PolicyKind::Ratio && eps_opt->count() > 0) {
                throw Error(ErrorKind::Configuration, "--eps given with --policy ratio");
            }
            const auto warnings = regularity_warnings(model, m);
            const Solution sol =
                solve(model, make_policy(kind, kind == PolicyKind::Difference ? eps : gamma), m.cost, cfg);
            emit(m, solution_json(sol, warnings).dump(2) + "\n", out);
            return 0;
        }

        if (sweep_cmd->parsed()) {
            const DemandModel model = build_model(m);
            const PolicyKind kind = parse_kind(policy);
            const auto grid = param_grid(params, from, to, steps, log_grid, from_opt->count() > 0);
            const SweepTable table = sweep(model, kind, grid, m.cost, cfg);
            if (table.succeeded() == 0) {
                // Re-run the first row so the process exits with that row's error class.
                solve(model, make_policy(kind, grid.front()), m.cost, cfg);
                throw Error(ErrorKind::Regularity,
                            "every sweep row failed: " + table.rows.front().error);
            }
            if (format == "json") {
                json rows = json::array();
                for (const auto& row : table.rows) {
                    if (row.solution) rows.push_back(solution_json(*row.solution));
                    else rows.push_back({{"param", num(row.param)}, {"error", row.error}});
                }
                const json doc = {{"model", table.model},
                                  {"policy", to_string(kind)},
                                  {"cost", num(table.cost)},
                                  {"efficient_trade", num(table.efficient_trade)},
                                  {"rows", rows}};
                emit(m, doc.dump(2) + "\n", out);
                return 0;
            }
            std::ostringstream os;
            os << csv_header_comment(m, model, cfg,
                                     "; policy=" + std::string(to_string(kind)) +
                                         "; efficient_trade=" + format15(table.efficient_trade));
            os << "param,p_l,p_u,cs,ps,ts,error\n";
            for (const auto& row : table.rows) {
                os << format15(row.param);
                if (row.solution) {
                    const auto& w = row.solution->welfare;
                    os << ',' << format15(w.band.lower) << ',' << format15(w.band.upper) << ','
                       << format15(w.cs) << ',' << format15(w.ps) << ',' << format15(w.ts) << ",\n";
                } else {
                    std::string msg = row.error;
                    for (char& ch : msg) {
                        if (ch == ',' || ch == '\n') ch = ';';
                    }
                    os << ",,,,,," << msg << "\n";
                }
            }
            emit(m, os.str(), out);
            return 0;
        }

        if (check_cmd->parsed()) {
            const DemandModel model = build_model(m);
            RegularityGrid grid;
            grid.n_points = m.grid_points;
            grid.tail_mass = m.tail_mass;
            json doc = regularity_json(check_regularity(model, k, grid));
            doc["model"] = model.describe();
            emit(m, doc.dump(2) + "\n", out);
            return 0;
        }

        if (threshold_cmd->parsed()) {
            const DemandModel model = build_model(m);
            const double eps0 = epsilon_threshold(model, m.cost, cfg);
            const Solution uniform = solve_uniform_price(model, m.cost, cfg);
            const json doc = {{"model", model.describe()},
                              {"cost", num(m.cost)},
                              {"epsilon_0", num(eps0)},
                              {"uniform_price", num(uniform.band.lower)},
                              {"bound", num(2.0 * (uniform.band.lower - m.cost))}};
            emit(m, doc.dump(2) + "\n", out);
            return 0;
        }

        if (dom_cmd->parsed()) {
            const DemandModel model = build_model(m);
            const auto grid = param_grid(params, from, to, steps, log_grid, dom_from->count() > 0);
            std::ostringstream os;
            os << csv_header_comment(m, model, cfg, "");
            os << "gamma,cs_level,eps_matched,ps_diff,ps_ratio,ts_diff,ts_ratio,error\n";
            std::size_t ok = 0;
            std::string last_error;
            for (double g : grid) {
                try {
                    const auto r = dominance_compare(model, g, m.cost, cfg);
                    os << format15(r.gamma) << ',' << format15(r.cs_level) << ','
                       << format15(r.eps_matched) << ',' << format15(r.ps_diff) << ','
                       << format15(r.ps_ratio) << ',' << format15(r.ts_diff) << ','
                       << format15(r.ts_ratio) << ",\n";
                    ++ok;
                } catch (const std::exception& e) {
                    last_error = e.what();
                    for (char& ch : last_error) {
                        if (ch == ',' || ch == '\n') ch = ';';
                    }
                    os << format15(g) << ",,,,,,," << last_error << "\n";
                }
            }
            if (ok == 0) throw Error(ErrorKind::Matching, "every dominance row failed: " + last_error);
            emit(m, os.str(), out);
            return 0;
        }

        // fit
        CsvSchema schema;
        schema.price = price_col;
        schema.bought = bought_col;
        schema.covariates = covariates;
        if (loan) schema.loan = loan_cols;
        const auto records = load_csv(csv_path, schema);
        const LogisticFit fit = fit_logistic(records, !covariates.empty());
        const BuiltinFamily fam = demand_family(fit, records);
        make_builtin(fam);  // rejects fits that are not valid demand models
        json doc = fit_to_json(fit);
        round_numbers(doc);
        doc["records"] = records.size();
        doc["form"] = model_file_json(fam)["form"];
        if (!save_model.empty()) {
            ModelArgs target;
            target.out = save_model;
            emit(target, model_file_json(fam).dump(2) + "\n", out);
            doc["model_file"] = save_model;
        }
        emit(m, doc.dump(2) + "\n", out);
        return 0;
    } catch (const Error& e) {
        err << json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return 3;
    }
}

}  // namespace fairprice::cli
