#include <doctest.h>

#include <cmath>
#include <random>

#include "fairprice/welfare.hpp"

using namespace fairprice;

namespace {

const DemandModel kUniform = make_builtin(family::Uniform{1.0});
const DemandModel kExpo = make_builtin(family::Exponential{1.0});
const DemandModel kPower = make_builtin(family::PowerLaw{1.0, 2.0});

// Distribution wrapper that hides the closed-form tail so welfare falls back
// to quadrature of the raw integrands.
class NumericOnly final : public Distribution {
public:
    explicit NumericOnly(DemandModel base) : base_(std::move(base)) {}
    Support support() const override { return base_.support(); }
    double pdf(double v) const override { return base_.pdf(v); }
    double survival(double v) const override { return base_.survival(v); }
    std::string describe() const override { return "numeric(" + base_.describe() + ")"; }

private:
    DemandModel base_;
};

}  // namespace

TEST_CASE("producer surplus examples") {
    CHECK(producer_surplus(kUniform, {0.25, 0.75}, 0.0) == doctest::Approx(0.4375).epsilon(1e-12));
    CHECK(producer_surplus(kUniform, {0.5, 0.5}, 0.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(producer_surplus(kExpo, {1.0, 1.0}, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("consumer surplus examples") {
    CHECK(consumer_surplus(kUniform, {0.25, 0.75}, 0.0) == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(std::abs(consumer_surplus(kUniform, {0.3, 1.0}, 0.0)) < 1e-15);
    CHECK(consumer_surplus(kExpo, {1.0, 1.0}, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    const double u = effective_upper(kExpo);
    CHECK(consumer_surplus(kExpo, {0.5, u}, 0.0) < 1e-11);
}

TEST_CASE("total surplus examples") {
    CHECK(total_surplus(kUniform, {0.25, 0.75}, 0.0) == doctest::Approx(0.46875).epsilon(1e-12));
    CHECK(total_surplus(kPower, {1.0, 1.0}, 0.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(total_surplus(kUniform, {0.0, 0.0}, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("efficient trade surplus") {
    CHECK(efficient_trade_surplus(kUniform, 0.0) == doctest::Approx(0.5));
    CHECK(efficient_trade_surplus(kExpo, 0.0) == doctest::Approx(1.0));
    CHECK(efficient_trade_surplus(kExpo, 0.5) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(efficient_trade_surplus(make_builtin(family::PowerLaw{1.0, 1.0}), 0.0), Error);
}

TEST_CASE("welfare report examples") {
    const auto a = welfare_report(kUniform, {0.4, 0.8}, 0.0);
    CHECK(a.ps == doctest::Approx(0.4));
    CHECK(a.cs == doctest::Approx(0.02));
    CHECK(a.ts == doctest::Approx(0.42));
    const auto b = welfare_report(kUniform, {0.5, 0.5}, 0.0);
    CHECK(b.ps == doctest::Approx(0.25));
    CHECK(b.cs == doctest::Approx(0.125));
    CHECK(b.ts == doctest::Approx(0.375));
    const auto c = welfare_report(kPower, {1.0, 1.0}, 0.0);
    CHECK(c.ps == doctest::Approx(0.25));
    CHECK(c.cs == doctest::Approx(0.5));
    CHECK(c.ts == doctest::Approx(0.75));
}

TEST_CASE("band validation errors") {
    const auto kind = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Consistency;
    };
    CHECK(kind([] { producer_surplus(kUniform, {0.1, 0.5}, 0.2); }) == ErrorKind::Domain);
    CHECK(kind([] { producer_surplus(kUniform, {0.6, 0.5}, 0.0); }) == ErrorKind::Domain);
    CHECK(kind([] { producer_surplus(kUniform, {0.6, 1.5}, 0.0); }) == ErrorKind::Domain);
    CHECK(kind([] { producer_surplus(make_builtin(family::PowerLaw{1.0, 0.9}), {1.0, 2.0}, 0.0); }) ==
          ErrorKind::Divergence);
}

TEST_CASE("quadrature fallback agrees with closed forms") {
    for (const auto& base : {kUniform, kExpo, kPower, make_preset("coke")}) {
        const DemandModel numeric(std::make_shared<NumericOnly>(base));
        CAPTURE(base.describe());
        for (const PriceBand band : {PriceBand{0.2, 0.6}, PriceBand{0.5, 0.5}, PriceBand{0.3, 0.9}}) {
            for (double c : {0.0, 0.1}) {
                const auto exact = welfare_report(base, band, c);
                const auto approx = welfare_report(numeric, band, c);
                CHECK(approx.ps == doctest::Approx(exact.ps).epsilon(1e-8));
                CHECK(approx.cs == doctest::Approx(exact.cs).epsilon(1e-8));
                CHECK(approx.ts == doctest::Approx(exact.ts).epsilon(1e-8));
                CHECK(std::abs(approx.cs + approx.ps - approx.ts) <=
                      kWelfareTolerance * std::max(1.0, approx.ts));
            }
        }
    }
}

TEST_CASE("welfare properties over random bands") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<DemandModel> models = {kUniform, kExpo, kPower, make_preset("cake"),
                                             make_builtin(family::Logistic{0.3, 1.0})};
    for (const auto& m : models) {
        const double top = std::min(effective_upper(m), 6.0);
        for (int trial = 0; trial < 100; ++trial) {
            const double c = 0.2 * top * u(rng);
            const double lo = c + (top - c) * u(rng);
            const double hi = lo + (top - lo) * u(rng);
            const auto r = welfare_report(m, {lo, hi}, c);
            CHECK(r.ps >= 0.0);
            CHECK(r.cs >= 0.0);
            CHECK(r.ts >= 0.0);
            CHECK(std::abs(r.cs + r.ps - r.ts) <= kWelfareTolerance * std::max(1.0, r.ts));
            const double eff = efficient_trade_surplus(m, c);
            CHECK(r.ts <= eff + 1e-12);
            const auto at_cost = welfare_report(m, {c, hi}, c);
            CHECK(at_cost.ts == doctest::Approx(eff).epsilon(1e-10));
        }
    }
}

TEST_CASE("surplus monotonicity in band endpoints") {
    for (const auto& m : {kUniform, kExpo, kPower}) {
        const double top = std::min(effective_upper(m), 4.0);
        const double p_u = 0.9 * top;
        double prev_ts = total_surplus(m, {0.0, p_u}, 0.0);
        for (int i = 1; i <= 100; ++i) {
            const double ts = total_surplus(m, {p_u * i / 100.0, p_u}, 0.0);
            CHECK(ts < prev_ts);
            prev_ts = ts;
        }
        double prev_cs = consumer_surplus(m, {0.0, 0.0}, 0.0);
        for (int i = 1; i <= 100; ++i) {
            const double cs = consumer_surplus(m, {0.0, p_u * i / 100.0}, 0.0);
            CHECK(cs < prev_cs);
            prev_cs = cs;
        }
    }
}
