#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <sys/wait.h>

#include "fairprice/cli.hpp"
#include "fairprice/ingest.hpp"

using namespace fairprice;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "fairprice_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

void write_coke_csv(const std::filesystem::path& path, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> price(0.0, 2.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::ofstream f(path);
    f << "price,bought\n";
    f.precision(17);
    for (int i = 0; i < 10000; ++i) {
        const double p = price(rng);
        f << p << ',' << (unit(rng) < sigmoid(3.94 - 3.44 * p) ? 1 : 0) << '\n';
    }
}

}  // namespace

TEST_CASE("solve examples") {
    auto r = run({"solve", "--dist", "uniform", "--a", "1", "--policy", "diff", "--eps", "0.5"});
    REQUIRE(r.code == 0);
    auto doc = json::parse(r.out);
    CHECK(doc["p_l"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(doc["p_u"].get<double>() == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(doc.contains("foc_residual"));
    CHECK(doc["warnings"].empty());

    r = run({"solve", "--preset", "coke", "--policy", "ratio", "--gamma", "1"});
    REQUIRE(r.code == 0);
    doc = json::parse(r.out);
    CHECK(doc["p_l"].get<double>() == doctest::Approx(0.920571166865089).epsilon(1e-12));
    CHECK(doc["p_u"].get<double>() == doc["p_l"].get<double>());

    r = run({"solve", "--dist", "exponential", "--lambda", "1", "--policy", "diff", "--eps", "0",
             "--cost", "0.5"});
    REQUIRE(r.code == 0);
    doc = json::parse(r.out);
    CHECK(doc["p_l"].get<double>() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(doc["p_u"].get<double>() == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("exit codes and error documents") {
    auto r = run({"solve", "--dist", "uniform", "--a", "-1"});
    CHECK(r.code == 2);
    CHECK(json::parse(r.err)["error"] == "parameter");
    CHECK(run({"solve", "--dist", "uniform", "--preset", "coke"}).code == 2);
    CHECK(run({"solve"}).code == 2);
    CHECK(run({"solve", "--dist", "bogus"}).code == 2);
    CHECK(run({"solve", "--dist", "uniform", "--eps", "2"}).code == 2);
    CHECK(run({"solve", "--dist", "uniform", "--policy", "diff", "--gamma", "2"}).code == 2);
    r = run({"threshold", "--dist", "powerlaw", "--delta", "1", "--alpha", "1"});
    CHECK(r.code == 3);
    CHECK(json::parse(r.err)["error"] == "divergence");
    CHECK(run({"fit", "--csv", scratch("missing.csv").string()}).code == 4);
}

TEST_CASE("sweep csv") {
    auto r = run({"sweep", "--dist", "uniform", "--policy", "diff", "--params",
                  "0,0.25,0.5,0.75,0.999"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("# model=", 0) == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == std::vector<std::string>{"param", "p_l", "p_u", "cs", "ps", "ts", "error"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double eps = std::stod(rows[i][0]);
        CHECK(std::stod(rows[i][3]) == doctest::Approx((1 - eps) * (1 - eps) / 8).epsilon(1e-12));
        if (i > 1) CHECK(std::stod(rows[i][3]) < std::stod(rows[i - 1][3]));
    }

    r = run({"sweep", "--dist", "powerlaw", "--delta", "1", "--alpha", "2", "--policy", "ratio",
             "--from", "1", "--to", "32", "--steps", "11", "--log"});
    REQUIRE(r.code == 0);
    const auto pr = csv_rows(r.out);
    REQUIRE(pr.size() == 12);
    for (std::size_t i = 2; i < pr.size(); ++i) {
        CHECK(std::stod(pr[i][1]) < std::stod(pr[i - 1][1]));
        CHECK(std::stod(pr[i][2]) > std::stod(pr[i - 1][2]));
    }

    r = run({"sweep", "--dist", "exponential", "--policy", "diff", "--from", "0", "--to", "2",
             "--steps", "5"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("; efficient_trade=1\n") != std::string::npos);
}

TEST_CASE("sweep rows fail independently") {
    auto r = run({"sweep", "--dist", "uniform", "--params", "0.5,3"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][6].empty());
    CHECK_FALSE(rows[2][6].empty());
    CHECK(rows[2][1].empty());
    CHECK(run({"sweep", "--dist", "uniform", "--params", "2,3"}).code == 2);
}

TEST_CASE("csv values parse back at 15 significant digits") {
    const auto r = run({"sweep", "--preset", "cake", "--policy", "ratio", "--params", "1,1.7,3.3"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    const auto model = make_preset("cake");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto sol = solve_ratio(model, std::stod(rows[i][0]), 0.0);
        CHECK(std::stod(rows[i][1]) == cli::round15(sol.band.lower));
        CHECK(std::stod(rows[i][2]) == cli::round15(sol.band.upper));
        CHECK(std::stod(rows[i][4]) == cli::round15(sol.welfare.ps));
        CHECK(cli::format15(std::stod(rows[i][5])) == rows[i][5]);
    }
}

TEST_CASE("sweep json output") {
    const auto r = run({"sweep", "--dist", "uniform", "--policy", "ratio", "--params", "1,2",
                        "--format", "json"});
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    CHECK(doc["rows"].size() == 2);
    CHECK(doc["rows"][1]["p_u"].get<double>() == doctest::Approx(0.8));
    CHECK(doc["efficient_trade"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("check examples") {
    auto doc = json::parse(run({"check", "--dist", "powerlaw", "--delta", "1", "--alpha", "2"}).out);
    CHECK(doc["is_mhr"] == false);
    CHECK(doc["w_monotone"] == true);
    CHECK_FALSE(doc["samples"].empty());
    doc = json::parse(run({"check", "--preset", "cake"}).out);
    CHECK(doc["is_mhr"] == true);
    doc = json::parse(run({"check", "--dist", "exponential", "--lambda", "1", "--k", "5"}).out);
    CHECK(doc["k_strong_regular_up_to"] == "inf");
    CHECK(doc["k_strongly_regular"] == true);
}

TEST_CASE("threshold examples") {
    auto doc = json::parse(run({"threshold", "--dist", "exponential", "--lambda", "1"}).out);
    CHECK(doc["epsilon_0"].get<double>() == doctest::Approx(0.852605502013725).epsilon(1e-10));
    doc = json::parse(run({"threshold", "--dist", "uniform", "--a", "1"}).out);
    CHECK(doc["epsilon_0"].get<double>() == doctest::Approx(0.5).epsilon(1e-10));
    doc = json::parse(run({"threshold", "--dist", "powerlaw", "--delta", "1", "--alpha", "2"}).out);
    CHECK(doc["epsilon_0"].get<double>() <= 2.0);
    CHECK(doc["epsilon_0"].get<double>() == doctest::Approx(0.606833293990194).epsilon(1e-9));
}

TEST_CASE("dominance csv") {
    auto r = run({"dominance", "--dist", "uniform", "--gamma", "1,2"});
    REQUIRE(r.code == 0);
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(std::stod(rows[1][3]) == doctest::Approx(std::stod(rows[1][4])));
    CHECK(std::stod(rows[2][3]) == doctest::Approx(0.46).epsilon(1e-9));
    CHECK(std::stod(rows[2][4]) == doctest::Approx(0.4));

    r = run({"dominance", "--dist", "exponential", "--gamma", "1.5,2,4"});
    REQUIRE(r.code == 0);
    rows = csv_rows(r.out);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::stod(rows[i][3]) - std::stod(rows[i][4]) >= -1e-8);
        CHECK(std::stod(rows[i][5]) - std::stod(rows[i][6]) >= -1e-8);
    }
}

TEST_CASE("fit pipeline and model-file round trip") {
    const auto csv = scratch("coke.csv");
    const auto model_path = scratch("coke_model.json");
    write_coke_csv(csv, 3);
    auto r = run({"fit", "--csv", csv.string(), "--save-model", model_path.string()});
    REQUIRE(r.code == 0);
    const auto fit = json::parse(r.out);
    CHECK(std::abs(fit["intercept"].get<double>() - 3.94) < 0.15);
    CHECK(std::abs(fit["price_coef"].get<double>() + 3.44) < 0.15);
    CHECK(fit["form"] == "truncated_logistic");

    const auto fam = load_model_file(model_path);
    const auto& t = std::get<family::TruncatedLogistic>(fam);
    const auto direct = solve_difference(make_builtin(fam), 0.3, 0.1);
    r = run({"solve", "--model-file", model_path.string(), "--eps", "0.3", "--cost", "0.1"});
    REQUIRE(r.code == 0);
    const auto via_file = json::parse(r.out);
    CHECK(via_file["p_l"].get<double>() == cli::round15(direct.band.lower));
    CHECK(via_file["ps"].get<double>() == cli::round15(direct.welfare.ps));
    const auto again = run({"solve", "--model-file", model_path.string(), "--eps", "0.3", "--cost",
                            "0.1"});
    CHECK(again.out == r.out);
    CHECK(t.b < 0.0);

    const auto balanced = scratch("balanced.csv");
    {
        std::ofstream f(balanced);
        f << "price,bought\n0,1\n0,0\n1,1\n1,0\n0,1\n0,0\n1,1\n1,0\n";
    }
    r = run({"fit", "--csv", balanced.string()});
    CHECK(r.code == 4);
    CHECK(json::parse(r.err)["error"] == "sign");
}

TEST_CASE("loan covariate fit produces a mixture model file") {
    const auto csv = scratch("loans.csv");
    const auto model_path = scratch("loan_model.json");
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> pay(30.0, 80.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::bernoulli_distribution coin(0.4);
        std::ofstream f(csv);
        f.precision(17);
        f << "monthly_payment,term,loan_amount,fico,bought\n";
        for (int i = 0; i < 3000; ++i) {
            const double payment = pay(rng);
            const int term = 12;
            const double amount = 300.0;
            const double fico = coin(rng) ? 1.0 : 0.0;
            const double p = loan_price(payment, term, amount);
            f << payment << ',' << term << ',' << amount << ',' << fico << ','
              << (unit(rng) < sigmoid(1.0 + 0.5 * fico - 0.01 * p) ? 1 : 0) << '\n';
        }
    }
    auto r = run({"fit", "--csv", csv.string(), "--loan-price", "--covariates", "fico",
                  "--save-model", model_path.string()});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["form"] == "mixture");
    std::ifstream in(model_path);
    CHECK(json::parse(in)["form"] == "mixture");
    r = run({"check", "--model-file", model_path.string()});
    CHECK(r.code == 0);
}

TEST_CASE("output files are written atomically") {
    const auto path = scratch("solve.json");
    std::filesystem::remove(path);
    const auto r = run({"solve", "--dist", "uniform", "--eps", "0.5", "--out", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    CHECK(std::filesystem::exists(path));
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    std::ifstream in(path);
    CHECK(json::parse(in)["p_u"].get<double>() == doctest::Approx(0.75));
}

TEST_CASE("tolerance overrides from the environment") {
    CHECK(cli::config_from_env(nullptr).root.abs_tol == SolverConfig{}.root.abs_tol);
    const auto one = cli::config_from_env("1e-9");
    CHECK(one.root.abs_tol == 1e-9);
    CHECK(one.root.rel_tol == 1e-9);
    const auto pairs = cli::config_from_env("quad_rel=1e-7,root_abs=1e-13");
    CHECK(pairs.quad.rel_tol == 1e-7);
    CHECK(pairs.root.abs_tol == 1e-13);
    CHECK_THROWS_AS(cli::config_from_env("speed=3"), Error);
    CHECK_THROWS_AS(cli::config_from_env("-1"), Error);
}

TEST_CASE("number formatting") {
    CHECK(cli::format15(0.1 + 0.2) == "0.3");
    CHECK(cli::format15(1.0 / 3.0) == "0.333333333333333");
    CHECK(cli::format15(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(cli::round15(1.0 / 3.0) == 0.333333333333333);
}

TEST_CASE("installed binary reports exit codes") {
    const std::string bin = FAIRPRICE_CLI_PATH;
    const auto status = [&](const std::string& args) {
        const int raw = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    CHECK(status("solve --dist uniform --eps 0.5") == 0);
    CHECK(status("solve --dist uniform --a 0") == 2);
    CHECK(status("threshold --dist powerlaw --alpha 0.5") == 3);
    CHECK(status("fit --csv /nonexistent/file.csv") == 4);
}
