#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "arcvol/black_scholes.hpp"
#include "arcvol/calibration.hpp"
#include "arcvol/errors.hpp"
#include "arcvol/pricer.hpp"

using namespace arcvol;
using Catch::Approx;

namespace {

std::vector<OptionQuote> synthetic(double a, double k, double v_eff, double sigma) {
    std::vector<OptionQuote> out;
    for (auto [t, T] : {std::pair{0.0, 0.5}, std::pair{0.25, 1.0}, std::pair{0.5, 1.5}})
        for (double K : {90.0, 100.0, 110.0, 120.0}) {
            OptionQuote q{t, T, K, 0.0, 100.0, 0.0264};
            q.mid = calibration_model_price(q, a, k, v_eff, sigma);
            out.push_back(q);
        }
    return out;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidParameter;
}

}  // namespace

TEST_CASE("chain parsing", "[calibration]") {
    std::istringstream ok("t,T,K,mid,x,r\n0,0.5,100,6.0,100,0.0264\n0,0.5,110,2.0,100,0.0264\n0,1,90,14,100,0.0264\n");
    const auto load = parse_chain(ok);
    CHECK(load.quotes.size() == 3);
    CHECK(load.rejected.empty());
    CHECK(load.quotes[2].strike == 90.0);

    std::istringstream mixed("t,T,K,mid,x,r\n0,0.5,100,6.0,100,0.0264\n0,0.5,80,1.0,100,0.0264\n0.5,0.5,100,1,100,0\n");
    const auto m = parse_chain(mixed);
    CHECK(m.quotes.size() == 1);
    REQUIRE(m.rejected.size() == 2);
    CHECK(m.rejected[0].line == 3);
    CHECK(m.rejected[1].line == 4);

    std::istringstream empty("");
    CHECK(code_of([&] { parse_chain(empty); }) == ErrorCode::EmptyChain);
    std::istringstream header_only("t,T,K,mid,x,r\n");
    CHECK(code_of([&] { parse_chain(header_only); }) == ErrorCode::EmptyChain);
    std::istringstream bad_header("t,T,K,price,x,r\n0,0.5,100,6,100,0\n");
    CHECK(code_of([&] { parse_chain(bad_header); }) == ErrorCode::ParseError);
    std::istringstream short_row("t,T,K,mid,x,r\n0,0.5,100,6,100\n");
    CHECK(code_of([&] { parse_chain(short_row); }) == ErrorCode::ParseError);
    std::istringstream junk("t,T,K,mid,x,r\n0,0.5,abc,6,100,0\n");
    CHECK(code_of([&] { parse_chain(junk); }) == ErrorCode::ParseError);
}

TEST_CASE("chain round trip", "[calibration]") {
    const auto quotes = synthetic(0.05, 0.008, 0.0, 0.2);
    std::ostringstream os;
    write_chain(os, quotes);
    std::istringstream is(os.str());
    const auto back = parse_chain(is);
    REQUIRE(back.quotes.size() == quotes.size());
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        CHECK(back.quotes[i].mid == quotes[i].mid);
        CHECK(back.quotes[i].maturity == quotes[i].maturity);
    }
}

TEST_CASE("model price used for calibration", "[calibration]") {
    const OptionQuote q{0.0, 0.5, 105.0, 0.0, 100.0, 0.0264};
    const double g = modification_factor(0.0, 0.05, 0.0264, 0.008);
    const BsInputs in{100, 105, 0.0264, 0.2, 0.5};
    const double expect = g * (bs_call_price(in) + 0.003 * p1_time_factor(0.0, 0.5, 0.008) * d1d2_call(in));
    CHECK(calibration_model_price(q, 0.05, 0.008, 0.003, 0.2) == Approx(expect).epsilon(1e-14));
}

TEST_CASE("implied volatility inverts Black-Scholes", "[calibration]") {
    for (double vol : {0.05, 0.2, 0.9}) {
        const double p = bs_call_price({100, 110, 0.01, vol, 0.75});
        CHECK(implied_vol(p, 100, 110, 0.01, 0.75) == Approx(vol).epsilon(1e-9));
    }
    const auto quotes = synthetic(0.0528 + 0.0, 0.008, 0.0, 0.2);
    CHECK(near_money_implied_vol(quotes) == Approx(0.2).epsilon(1e-8));
}

TEST_CASE("estimate_a round trip", "[calibration]") {
    const auto quotes = synthetic(0.05, 0.008, 0.0, 0.2);
    const auto est = estimate_a(quotes, 0.008, 0.0264, 0.2);
    CHECK(est.a_hat == Approx(0.05).margin(1e-6));
    CHECK(est.objective < 1e-8);
    CHECK(est.per_strike.size() == 4);
    for (const auto& row : est.per_strike) CHECK(row.a_hat == Approx(0.05).margin(1e-5));

    const auto low = synthetic(0.0, 0.008, 0.0, 0.2);
    CHECK(estimate_a(low, 0.008, 0.0264, 0.2).a_hat == Approx(0.0).margin(1e-6));
}

TEST_CASE("estimate_a guards", "[calibration]") {
    auto quotes = synthetic(0.05, 0.008, 0.0, 0.2);
    std::vector<OptionQuote> one_maturity(quotes.begin(), quotes.begin() + 4);
    CHECK(code_of([&] { estimate_a(one_maturity, 0.008, 0.0264, 0.2); }) == ErrorCode::InsufficientData);
    CHECK(code_of([&] { estimate_a({quotes[0]}, 0.008, 0.0264, 0.2); }) == ErrorCode::InsufficientData);

    const auto far = synthetic(0.45, 0.008, 0.0, 0.2);
    ABounds tight;
    tight.lo = -0.1;
    tight.hi = 0.1;
    CHECK(code_of([&] { estimate_a(far, 0.008, 0.0264, 0.2, tight); }) == ErrorCode::NoInteriorMinimum);
}

TEST_CASE("effective calibration recovers generating parameters", "[calibration]") {
    const auto quotes = synthetic(0.05, 0.008, 0.002, 0.21);
    CalibOptions opts;
    opts.fixed_k = 0.008;
    const auto res = calibrate_effective(quotes, opts);
    CHECK(res.a_hat == Approx(0.05).margin(1e-3));
    CHECK(res.sigma_bar_hat == Approx(0.21).margin(1e-4));
    CHECK(res.v_eff_hat == Approx(0.002).epsilon(0.05));
    CHECK(res.k_hat == 0.008);
    CHECK(res.objective < 1e-6);
    CHECK(res.restart_objectives.size() == opts.restarts);
}

TEST_CASE("zero correction is a nested case", "[calibration]") {
    const auto quotes = synthetic(0.05, 0.008, 0.0, 0.2);
    CalibOptions opts;
    opts.fixed_k = 0.008;
    const auto res = calibrate_effective(quotes, opts);
    CHECK(std::abs(res.v_eff_hat) < 1e-3);
    CHECK(res.objective < 1e-6);
}

TEST_CASE("calibration is reproducible and respects bounds", "[calibration]") {
    const auto quotes = synthetic(0.05, 0.008, 0.002, 0.21);
    CalibOptions opts;
    opts.restarts = 2;
    const auto a = calibrate_effective(quotes, opts);
    const auto b = calibrate_effective(quotes, opts);
    CHECK(a.a_hat == b.a_hat);
    CHECK(a.objective == b.objective);
    CHECK(a.objective >= 0.0);
    CHECK(a.k_hat >= opts.bounds.k_lo);
    CHECK(a.k_hat <= opts.bounds.k_hi);
    CHECK(std::abs(a.a_hat - 2 * 0.0264) >= opts.bounds.a.gap);
    for (std::size_t i = 0; i < a.restart_objectives.size(); ++i)
        CHECK(a.restart_objectives[i] <= a.restart_start_objectives[i]);

    std::vector<OptionQuote> few(quotes.begin(), quotes.begin() + 3);
    CHECK(code_of([&] { calibrate_effective(few); }) == ErrorCode::InsufficientData);
}

TEST_CASE("report format", "[calibration]") {
    CalibResult r;
    r.a_hat = 0.05;
    std::ostringstream os;
    write_calib_report(os, r);
    CHECK(os.str().find("a_hat=0.05") != std::string::npos);
    CHECK(os.str().find("converged=") != std::string::npos);
}
