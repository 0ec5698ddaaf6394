#include "fairprice/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Dense>

namespace fairprice {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(trim(field));
            field.clear();
        } else {
            field += ch;
        }
    }
    out.push_back(trim(field));
    return out;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double x = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(x)) return std::nullopt;
        return x;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<bool> parse_outcome(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "1" || s == "true" || s == "yes" || s == "1.0") return true;
    if (s == "0" || s == "false" || s == "no" || s == "0.0") return false;
    return std::nullopt;
}

std::size_t column(const std::map<std::string, std::size_t>& header, const std::string& name) {
    const auto it = header.find(name);
    if (it == header.end()) throw Error(ErrorKind::Parse, "missing column '" + name + "'");
    return it->second;
}

double log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // y log sigma(eta) + (1 - y) log(1 - sigma(eta)) = y eta - softplus(eta)
        ll += y[i] * eta[i] - softplus(eta[i]);
    }
    return ll;
}

}  // namespace

std::vector<PurchaseRecord> parse_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::Data, "CSV input is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::map<std::string, std::size_t> header;
    {
        const auto names = split_row(line);
        for (std::size_t i = 0; i < names.size(); ++i) header[names[i]] = i;
    }

    std::optional<std::size_t> price_col;
    std::size_t pay_col = 0, term_col = 0, amount_col = 0;
    if (schema.loan) {
        pay_col = column(header, schema.loan->payment);
        term_col = column(header, schema.loan->term);
        amount_col = column(header, schema.loan->amount);
    } else {
        price_col = column(header, schema.price);
    }
    const std::size_t bought_col = column(header, schema.bought);
    std::vector<std::size_t> cov_cols;
    for (const auto& name : schema.covariates) cov_cols.push_back(column(header, name));

    std::vector<PurchaseRecord> records;
    std::vector<std::size_t> bad_lines;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_row(line);
        const auto field = [&](std::size_t col) -> std::string {
            return col < fields.size() ? fields[col] : std::string{};
        };

        std::optional<double> price;
        if (schema.loan) {
            const auto pay = parse_number(field(pay_col));
            const auto term = parse_number(field(term_col));
            const auto amount = parse_number(field(amount_col));
            if (pay && term && amount && *term >= 1.0 && std::floor(*term) == *term) {
                price = loan_price(*pay, static_cast<int>(*term), *amount, schema.loan->rate);
            }
        } else {
            price = parse_number(field(*price_col));
        }
        const auto bought = parse_outcome(field(bought_col));
        PurchaseRecord rec{price.value_or(-1.0), bought.value_or(false), {}};
        bool ok = price && bought && *price >= 0.0;
        for (std::size_t col : cov_cols) {
            const auto x = parse_number(field(col));
            ok = ok && x.has_value();
            rec.covariates.push_back(x.value_or(0.0));
        }
        if (!ok) {
            bad_lines.push_back(line_no);
            continue;
        }
        records.push_back(std::move(rec));
    }
    if (!bad_lines.empty()) {
        std::ostringstream os;
        os << "malformed CSV rows at lines";
        for (std::size_t i = 0; i < bad_lines.size() && i < 20; ++i) os << ' ' << bad_lines[i];
        if (bad_lines.size() > 20) os << " ... (" << bad_lines.size() << " total)";
        throw Error(ErrorKind::Parse, os.str());
    }
    if (records.empty()) throw Error(ErrorKind::Data, "CSV contains no data rows");
    return records;
}

std::vector<PurchaseRecord> load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Data, "cannot open " + path.string());
    return parse_csv(in, schema);
}

double loan_price(double monthly_payment, int term, double loan_amount, double rate) {
    if (term < 1) throw Error(ErrorKind::Parameter, "loan term must be at least one period");
    if (!(rate > -1.0)) throw Error(ErrorKind::Parameter, "loan rate must exceed -1");
    double discount = 0.0;
    double factor = 1.0;
    for (int t = 1; t <= term; ++t) {
        factor /= (1.0 + rate);
        discount += factor;
    }
    return monthly_payment * discount - loan_amount;
}

LogisticFit fit_logistic(std::span<const PurchaseRecord> records, bool use_covariates,
                         const FitConfig& cfg) {
    if (records.size() < 2) throw Error(ErrorKind::Data, "logistic fit needs at least 2 records");
    const std::size_t dim = use_covariates ? records.front().covariates.size() : 0;
    std::size_t positives = 0;
    for (const auto& r : records) {
        if (use_covariates && r.covariates.size() != dim) {
            throw Error(ErrorKind::Data, "covariate vectors have inconsistent dimensions");
        }
        positives += r.bought;
    }
    if (positives == 0 || positives == records.size()) {
        throw Error(ErrorKind::Data, "logistic fit needs both purchase outcomes");
    }

    const auto n = static_cast<Eigen::Index>(records.size());
    const auto k = static_cast<Eigen::Index>(2 + dim);
    Eigen::MatrixXd x(n, k);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = records[static_cast<std::size_t>(i)];
        x(i, 0) = 1.0;
        x(i, 1) = r.price;
        for (std::size_t j = 0; j < dim; ++j) x(i, static_cast<Eigen::Index>(2 + j)) = r.covariates[j];
        y[i] = r.bought ? 1.0 : 0.0;
    }

    LogisticFit fit;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    double ll = log_likelihood(x, y, beta);
    fit.log_likelihood_trace.push_back(ll);
    const double inv_n = 1.0 / static_cast<double>(n);

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        const Eigen::VectorXd eta = x * beta;
        Eigen::VectorXd p(n);
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p[i] = sigmoid(eta[i]);
            w[i] = p[i] * (1.0 - p[i]);
        }
        const Eigen::VectorXd grad = x.transpose() * (y - p);
        fit.iterations = iter;
        if (grad.norm() * inv_n < cfg.grad_tol) {
            fit.converged = true;
            break;
        }
        if (ll * inv_n > -1e-6 || beta.lpNorm<Eigen::Infinity>() > 1e8) {
            throw Error(ErrorKind::Separation,
                        "outcomes are perfectly separated; the likelihood has no maximum");
        }
        Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x;
        hess.diagonal().array() += cfg.ridge;
        const Eigen::VectorXd step = hess.ldlt().solve(grad);

        double scale = 1.0;
        Eigen::VectorXd candidate = beta + step;
        double ll_new = log_likelihood(x, y, candidate);
        for (int halving = 0; halving < 40 && !(ll_new >= ll); ++halving) {
            scale *= 0.5;
            candidate = beta + scale * step;
            ll_new = log_likelihood(x, y, candidate);
        }
        if (!(ll_new >= ll)) break;  // no ascent possible at machine precision
        beta = candidate;
        ll = ll_new;
        fit.log_likelihood_trace.push_back(ll);
        fit.iterations = iter + 1;
    }

    fit.intercept = beta[0];
    fit.price_coef = beta[1];
    for (std::size_t j = 0; j < dim; ++j) {
        fit.covariate_coefs.push_back(beta[static_cast<Eigen::Index>(2 + j)]);
    }
    fit.log_likelihood = ll;
    if (!fit.converged) {
        if (ll * inv_n > -1e-6 || beta.lpNorm<Eigen::Infinity>() > 1e8) {
            throw Error(ErrorKind::Separation,
                        "outcomes are perfectly separated; the likelihood has no maximum");
        }
        std::ostringstream os;
        os.precision(15);
        os << "logistic fit did not converge after " << fit.iterations
           << " iterations (a=" << fit.intercept << ", b=" << fit.price_coef << ")";
        throw Error(ErrorKind::Convergence, os.str());
    }
    return fit;
}

BuiltinFamily demand_family(const LogisticFit& fit, std::span<const PurchaseRecord> records) {
    if (!(fit.price_coef < 0.0)) {
        std::ostringstream os;
        os.precision(15);
        os << "fitted price coefficient " << fit.price_coef
           << " is not negative; demand is not downward sloping";
        throw Error(ErrorKind::Sign, os.str());
    }
    if (fit.covariate_coefs.empty()) {
        return family::TruncatedLogistic{fit.intercept, fit.price_coef};
    }
    if (records.empty()) {
        throw Error(ErrorKind::Data, "covariate demand needs the records defining E_x");
    }
    std::map<double, double> mass;
    for (const auto& r : records) {
        if (r.covariates.size() != fit.covariate_coefs.size()) {
            throw Error(ErrorKind::Data, "record covariates do not match the fit");
        }
        double c = fit.intercept;
        for (std::size_t j = 0; j < r.covariates.size(); ++j) c += fit.covariate_coefs[j] * r.covariates[j];
        mass[c] += 1.0;
    }
    family::MixtureLogistic mix{{}, fit.price_coef, {}};
    for (const auto& [c, w] : mass) {
        mix.intercepts.push_back(c);
        mix.weights.push_back(w);
    }
    return mix;
}

DemandModel to_demand(const LogisticFit& fit, std::span<const PurchaseRecord> records) {
    return make_builtin(demand_family(fit, records));
}

nlohmann::json fit_to_json(const LogisticFit& fit) {
    return {{"intercept", fit.intercept},
            {"price_coef", fit.price_coef},
            {"covariate_coefs", fit.covariate_coefs},
            {"log_likelihood", fit.log_likelihood},
            {"converged", fit.converged},
            {"iterations", fit.iterations}};
}

nlohmann::json model_file_json(const BuiltinFamily& fam) {
    if (const auto* t = std::get_if<family::TruncatedLogistic>(&fam)) {
        return {{"form", "truncated_logistic"}, {"parameters", {{"a", t->a}, {"b", t->b}}}};
    }
    if (const auto* m = std::get_if<family::MixtureLogistic>(&fam)) {
        nlohmann::json params = {{"intercepts", m->intercepts}, {"beta", m->beta}};
        if (!m->weights.empty()) params["weights"] = m->weights;
        return {{"form", "mixture"}, {"parameters", params}};
    }
    throw Error(ErrorKind::Configuration, "model files store fitted logistic forms only");
}

BuiltinFamily family_from_model_file(const nlohmann::json& doc) {
    try {
        const std::string form = doc.at("form").get<std::string>();
        const auto& p = doc.at("parameters");
        if (form == "truncated_logistic") {
            return family::TruncatedLogistic{p.at("a").get<double>(), p.at("b").get<double>()};
        }
        if (form == "mixture") {
            family::MixtureLogistic mix{p.at("intercepts").get<std::vector<double>>(),
                                        p.at("beta").get<double>(), {}};
            if (p.contains("weights")) mix.weights = p.at("weights").get<std::vector<double>>();
            return mix;
        }
        throw Error(ErrorKind::Parse, "unknown model form '" + form + "'");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("model file: ") + e.what());
    }
}

BuiltinFamily load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Data, "cannot open model file " + path.string());
    try {
        return family_from_model_file(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("model file: ") + e.what());
    }
}

}  // namespace fairprice
