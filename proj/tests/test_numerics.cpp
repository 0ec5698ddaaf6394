#include <doctest.h>

#include <cmath>
#include <random>

#include "fairprice/demand.hpp"
#include "fairprice/numerics.hpp"

using namespace fairprice;
using namespace fairprice::numerics;

TEST_CASE("root finder: worked examples") {
    CHECK(find_root_monotone([](double x) { return x - 0.5; }, {0.0, 1.0}) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(find_root_monotone([](double x) { return 1.0 - 2.0 * x; }, {0.0, 1.0}) ==
          doctest::Approx(0.5).epsilon(1e-12));

    // Plug-back oracle: the returned x must satisfy 2 e^{-x} = x.
    const double x = find_root_monotone([](double v) { return 2.0 * std::exp(-v) - v; }, {0.0, 3.0});
    CHECK(std::abs(2.0 * std::exp(-x) - x) < 1e-10);
    CHECK(x == doctest::Approx(0.852605502013725).epsilon(1e-10));
}

TEST_CASE("root finder: endpoint zero and errors") {
    CHECK(find_root_monotone([](double x) { return x; }, {0.0, 1.0}) == 0.0);
    CHECK_THROWS_AS(find_root_monotone([](double x) { return x + 1.0; }, {0.0, 1.0}), Error);
    try {
        find_root_monotone([](double x) { return x * x + 1.0; }, {-1.0, 1.0});
        FAIL("expected bracket error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Bracket);
    }
    CHECK_THROWS_AS(find_root_monotone([](double x) { return x; }, {-1.0, 1.0}, RootConfig{0.0, 1e-10, 200}),
                    Error);

    // A budget of 8 iterations on a steep function exhausts before tolerance.
    const auto steep = [](double x) { return std::cbrt(x - 1.0 / 3.0); };
    try {
        find_root_monotone(steep, {0.0, 1e6}, RootConfig{1e-300, 1e-300, 8});
        FAIL("expected convergence error");
    } catch (const ConvergenceError& e) {
        CHECK(e.last_bracket().lo <= e.last_bracket().hi);
    }
}

TEST_CASE("root finder property: sign change within tolerance of the result") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double root = u(rng);
        const double slope = std::exp(u(rng));
        const auto g = [=](double x) { return std::tanh(slope * (x - root)) + 0.1 * (x - root); };
        const RootConfig cfg;
        const double x = find_root_monotone(g, {-6.0, 6.0}, cfg);
        const double tol = cfg.abs_tol + cfg.rel_tol * std::abs(x);
        CHECK(g(x - tol) * g(x + tol) <= 0.0);
    }
}

TEST_CASE("quadrature: worked examples") {
    CHECK(integrate([](double) { return 1.0; }, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(integrate([](double v) { return (v - 1.0) * std::exp(-v); }, 1.0, kInf) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    CHECK(integrate([](double v) { return v * 2.0 * std::pow(v + 1.0, -3.0); }, 1.0, kInf) ==
          doctest::Approx(0.75).epsilon(1e-9));
    CHECK(integrate([](double v) { return v; }, 2.0, 2.0) == 0.0);
    CHECK_THROWS_AS(integrate([](double v) { return v; }, 2.0, 1.0), Error);
}

TEST_CASE("quadrature: additivity") {
    const auto f = [](double v) { return std::exp(-v) * std::cos(3.0 * v) + 1.0 / (1.0 + v * v); };
    const QuadConfig cfg;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 8.0);
    for (int i = 0; i < 20; ++i) {
        const double mid = u(rng);
        const double whole = integrate(f, 0.0, 8.0, cfg);
        const double parts = integrate(f, 0.0, mid, cfg) + integrate(f, mid, 8.0, cfg);
        CHECK(std::abs(whole - parts) < 3.0 * (cfg.abs_tol + cfg.rel_tol * std::abs(whole)));
    }
}

TEST_CASE("quadrature: accuracy error carries the best estimate") {
    // Oscillatory integrand with a depth budget of one subdivision.
    const auto f = [](double v) { return std::sin(200.0 * v) * std::exp(-v); };
    try {
        integrate(f, 0.0, 10.0, QuadConfig{1e-14, 1e-14, 1});
        FAIL("expected accuracy error");
    } catch (const AccuracyError& e) {
        CHECK(e.kind() == ErrorKind::Accuracy);
        CHECK(std::isfinite(e.estimate()));
    }
}

TEST_CASE("quadrature: every built-in density integrates to one") {
    const std::vector<BuiltinFamily> families = {
        family::Uniform{1.0},          family::Uniform{3.5},
        family::Exponential{1.0},      family::Exponential{0.3},
        family::PowerLaw{1.0, 2.0},    family::PowerLaw{0.5, 3.0},
        family::Logistic{0.4, 1.5},    family::TruncatedLogistic{3.94, -3.44},
        family::MixtureLogistic{{1.0, 2.5, 0.2}, -2.0},
    };
    for (const auto& fam : families) {
        const DemandModel m = make_builtin(fam);
        const double mass = integrate([&](double v) { return m.pdf(v); }, 0.0, m.support().upper);
        CHECK_MESSAGE(std::abs(mass - 1.0) < 1e-9, m.describe());
    }
}
