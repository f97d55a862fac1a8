#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "arcvol/black_scholes.hpp"
#include "arcvol/pricer.hpp"
#include "arcvol/slow_factor.hpp"

using namespace arcvol;
using Catch::Approx;

namespace {

ModelParams spx(double rho_xy = -0.5, double eps = 0.01) {
    RawModelParams raw;
    raw.rho_xy = rho_xy;
    raw.epsilon = eps;
    return build_model(raw);
}

}  // namespace

TEST_CASE("modification factor reference values", "[pricer]") {
    // Values from 50-digit evaluation of the closed form.
    CHECK(modification_factor(0.0, 0.05, 0.0264, 0.008) == Approx(0.934633).margin(5e-7));
    CHECK(modification_factor(0.25, 0.05, 0.0264, 0.008) == Approx(0.934797).margin(5e-7));
    CHECK(modification_factor(0.5, 0.05, 0.0264, 0.008) == Approx(0.934961).margin(5e-7));
    for (double t : {0.0, 0.25, 0.5}) CHECK(std::abs(modification_factor(t, 0.05, 0.0264, 0.008) - 0.934) <= 1e-3);
}

TEST_CASE("modification factor log form", "[pricer][property]") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double k = 0.001 + 0.5 * u(rng), r = 0.05 * u(rng), a = 0.2 * u(rng) - 0.1;
        const double t = 1.9 * u(rng) / k;
        const double c = (a - 2 * r) / k;
        const double w = std::abs(k * t - 2);
        const double logf = c * std::log(w) - c / w - (2 * r - a) * t / 2;
        CHECK(modification_factor(t, a, r, k) == Approx(std::exp(logf)).epsilon(1e-11));
    }
    CHECK(modification_factor(0.3, 0.0528, 0.0264, 0.008) == 1.0);
    CHECK_THROWS_AS(modification_factor(2.0 / 0.008, 0.05, 0.0264, 0.008), Error);
}

TEST_CASE("time factor", "[pricer]") {
    CHECK(p1_time_factor(0.0, 0.5, 0.008) == Approx(-0.2499997).margin(1e-7));
    CHECK(p1_time_factor(0.5, 0.5, 0.008) == 0.0);
    CHECK(p1_time_factor(0.3, 0.5, 0.008) == Approx(-0.1).margin(1e-5));
    double prev = p1_time_factor(0.4, 0.5, 0.008);
    for (double t : {0.45, 0.49, 0.499, 0.4999}) {
        const double cur = p1_time_factor(t, 0.5, 0.008);
        CHECK(std::abs(cur) < std::abs(prev));
        prev = cur;
    }
    CHECK(std::abs(prev) < 1e-4);
    CHECK_THROWS_AS(p1_time_factor(0.0, 250.0, 0.008), Error);
    try {
        p1_time_factor(0.0, 300.0, 0.008);
        FAIL("expected LogDomain");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LogDomain);
    }
}

TEST_CASE("p0 reference value", "[pricer]") {
    const auto model = spx();
    EffectiveParams eff;
    eff.sigma_bar = 0.2;
    const OptionSpec spec{100, 100, 0.0, 0.5};
    const double q0 = bs_call_price({100, 100, 0.0264, 0.2, 0.5});
    CHECK(p0(spec, model, eff) == Approx(modification_factor(0, 0.05, 0.0264, 0.008) * q0).epsilon(1e-14));
    CHECK(p0(spec, model, eff) == Approx(5.868).margin(2e-3));
    CHECK(p0(OptionSpec{120, 100, 0.5, 0.5}, model, eff) == 20.0);
    CHECK(p0(OptionSpec{80, 100, 0.5, 0.5}, model, eff) == 0.0);
}

TEST_CASE("first-order price assembly", "[pricer]") {
    const auto model = spx();
    const auto f = VolFunction::separable_exponential();
    const OptionSpec spec{100, 95, 0.0, 0.5};
    const auto b = price_first_order(spec, model, f);

    const double sb = 0.2 * std::exp(0.09);
    CHECK(b.sigma_bar == Approx(sb).epsilon(1e-10));
    CHECK(b.q0 == Approx(bs_call_price({100, 95, 0.0264, sb, 0.5})).epsilon(1e-10));
    CHECK(b.mod_factor == modification_factor(0.0, 0.05, 0.0264, 0.008));
    CHECK(b.time_factor == p1_time_factor(0.0, 0.5, 0.008));
    CHECK(b.d1d2 == Approx(d1d2_call({100, 95, 0.0264, sb, 0.5})).epsilon(1e-10));
    CHECK(b.p0 == Approx(b.mod_factor * b.q0).epsilon(1e-15));
    CHECK(b.correction == Approx(b.mod_factor * 0.1 * b.time_factor * b.v * b.d1d2).epsilon(1e-14));
    CHECK(b.total == Approx(b.p0 + b.correction).epsilon(1e-15));

    PricerOptions alt;
    alt.correction_form = CorrectionForm::OnModified;
    CHECK(price_first_order(spec, model, f, alt).total == Approx(b.total).epsilon(1e-13));
}

TEST_CASE("valuation on the arc", "[pricer]") {
    const auto model = spx();
    const auto f = VolFunction::y_constant();
    const OptionSpec spec{100, 100, 0.25, 0.75};
    const auto b = price_first_order(spec, model, f);
    CHECK(b.diagnostics.z == Approx(parabolic_coefficients(model).value(0.25)).epsilon(1e-15));
    CHECK(b.sigma_bar == b.diagnostics.z);

    PricerOptions integ;
    integ.vol_freeze = VolFreeze::MaturityIntegrated;
    const auto eff = effective_at_valuation(spec, model, f, integ);
    const auto arc = parabolic_coefficients(model);
    // sigma_bar^2 averaged over [t, T]; the arc is nearly linear over half a year.
    CHECK(eff.sigma_bar == Approx(arc.value(0.5)).epsilon(1e-6));
}

TEST_CASE("boundary at maturity is the payoff", "[pricer][property]") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto f = VolFunction::separable_exponential();
    for (int i = 0; i < 100; ++i) {
        RawModelParams raw;
        raw.rho_xy = -0.9 + 1.8 * u(rng);
        raw.z0 = 0.1 + 0.3 * u(rng);
        const auto model = build_model(raw);
        const double x = 50 + 100 * u(rng), k = 50 + 100 * u(rng), t = 2 * u(rng);
        const auto b = price_first_order(OptionSpec{x, k, t, t}, model, f);
        CHECK(b.total == std::max(x - k, 0.0));
        CHECK(b.correction == 0.0);
        CHECK(b.diagnostics.at_maturity);
    }
}

TEST_CASE("degenerate correction", "[pricer]") {
    const OptionSpec spec{100, 105, 0.0, 0.5};
    const auto zero_rho = price_first_order(spec, spx(0.0), VolFunction::separable_exponential());
    CHECK(zero_rho.v == 0.0);
    CHECK(zero_rho.total / zero_rho.mod_factor == Approx(zero_rho.q0).epsilon(1e-12));
    const auto flat = price_first_order(spec, spx(), VolFunction::y_constant());
    CHECK(flat.v == 0.0);
    CHECK(flat.total == Approx(flat.mod_factor * flat.q0).epsilon(1e-12));
}

TEST_CASE("price is homogeneous in spot and strike", "[pricer][property]") {
    const auto model = spx();
    const auto f = VolFunction::separable_exponential();
    const auto base = price_first_order(OptionSpec{100, 110, 0.0, 0.5}, model, f);
    for (double c : {2.0, 10.0}) {
        const auto scaled = price_first_order(OptionSpec{100 * c, 110 * c, 0.0, 0.5}, model, f);
        CHECK(scaled.total == Approx(c * base.total).epsilon(1e-8));
    }
}

TEST_CASE("correction scales with sqrt(epsilon)", "[pricer][property]") {
    const auto f = VolFunction::separable_exponential();
    const OptionSpec spec{100, 100, 0.0, 0.5};
    const double p_zero = price_first_order(spec, spx(-0.5, 1e-12), f).p0;
    double prev = 0.0;
    for (double eps : {1e-4, 1e-3, 1e-2, 4e-2}) {
        const auto b = price_first_order(spec, spx(-0.5, eps), f);
        const double dev = std::abs(b.total - p_zero);
        CHECK(dev > prev);
        CHECK(b.correction / std::sqrt(eps) ==
              Approx(price_first_order(spec, spx(-0.5, 1e-2), f).correction / 0.1).epsilon(1e-12));
        prev = dev;
    }
}

TEST_CASE("pde residual", "[pricer]") {
    const auto model = spx();
    EffectiveParams eff;
    eff.sigma_bar = 0.2;
    const OptionSpec spec{100, 100, 0.25, 0.75};
    CHECK(p0_pde_residual(spec, model, eff, {true, true}) <= 1e-4);
    // With the modification active the residual is a report, not a zero.
    const double full = p0_pde_residual(spec, model, eff);
    CHECK(std::isfinite(full));
    const double nearby = p0_pde_residual(OptionSpec{100, 100, 0.2501, 0.75}, model, eff);
    CHECK(nearby == Approx(full).epsilon(1e-2));
    CHECK_THROWS_AS(p0_pde_residual(OptionSpec{100, 100, 0.0, 0.75}, model, eff), Error);
}
