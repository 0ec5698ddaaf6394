#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairprice/demand.hpp"

namespace fairprice {

struct PurchaseRecord {
    double price;
    bool bought;
    std::vector<double> covariates;
};

/// Monthly rate used to discount loan payments (LIBOR estimate, 0.12%).
inline constexpr double kDefaultLoanRate = 0.0012;

/// Loan columns from which the price is derived as an NPV instead of read directly.
struct LoanColumns {
    std::string payment = "monthly_payment";
    std::string term = "term";
    std::string amount = "loan_amount";
    double rate = kDefaultLoanRate;
};

struct CsvSchema {
    std::string price = "price";
    std::string bought = "bought";
    std::vector<std::string> covariates;
    std::optional<LoanColumns> loan;
};

std::vector<PurchaseRecord> parse_csv(std::istream& in, const CsvSchema& schema);
std::vector<PurchaseRecord> load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// payment * sum_{t=1..term} (1 + rate)^-t - amount
double loan_price(double monthly_payment, int term, double loan_amount,
                  double rate = kDefaultLoanRate);

struct FitConfig {
    double grad_tol = 1e-8;  // on the gradient of the mean log-likelihood
    int max_iter = 100;
    double ridge = 1e-10;
};

struct LogisticFit {
    double intercept = 0.0;
    double price_coef = 0.0;
    std::vector<double> covariate_coefs;
    double log_likelihood = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> log_likelihood_trace;  // one entry per accepted iterate
};

/// Maximum-likelihood logistic regression of `bought` on (1, price[, covariates])
/// by Newton-Raphson / IRLS with step halving.
LogisticFit fit_logistic(std::span<const PurchaseRecord> records, bool use_covariates,
                         const FitConfig& cfg = {});

/// TruncatedLogistic{a, b} without covariates; otherwise the empirical mixture
/// of sigma(a + coef . x_i + b p) over the records.
BuiltinFamily demand_family(const LogisticFit& fit, std::span<const PurchaseRecord> records = {});
DemandModel to_demand(const LogisticFit& fit, std::span<const PurchaseRecord> records = {});

nlohmann::json fit_to_json(const LogisticFit& fit);

/// {"form": "truncated_logistic" | "mixture", "parameters": {...}}
nlohmann::json model_file_json(const BuiltinFamily& family);
BuiltinFamily family_from_model_file(const nlohmann::json& doc);
BuiltinFamily load_model_file(const std::filesystem::path& path);

}  // namespace fairprice
