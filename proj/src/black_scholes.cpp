#include "arcvol/black_scholes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "arcvol/errors.hpp"

namespace arcvol {

namespace {

void check_inputs(const BsInputs& in) {
    if (!std::isfinite(in.spot) || !std::isfinite(in.strike) || !std::isfinite(in.rate) ||
        !std::isfinite(in.sigma) || !std::isfinite(in.tau)) {
        throw Error(ErrorCode::DomainError, "Black-Scholes inputs must be finite");
    }
    if (!(in.spot > 0.0) || !(in.strike > 0.0))
        throw Error(ErrorCode::DomainError, "spot and strike must be > 0");
    if (in.sigma < 0.0 || in.tau < 0.0)
        throw Error(ErrorCode::DomainError, "sigma and tau must be >= 0");
}

void require_interior(const BsInputs& in) {
    check_inputs(in);
    if (!(in.tau > 0.0) || !(in.sigma > 0.0))
        throw Error(ErrorCode::DomainError, "Greeks need tau > 0 and sigma > 0");
}

double d1_of(const BsInputs& in, double vol_sqrt_tau) {
    return (std::log(in.spot / in.strike) + (in.rate + 0.5 * in.sigma * in.sigma) * in.tau) /
           vol_sqrt_tau;
}

}  // namespace

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double bs_call_price(const BsInputs& in) {
    check_inputs(in);
    if (in.tau == 0.0) return std::max(in.spot - in.strike, 0.0);
    const double discounted_strike = in.strike * std::exp(-in.rate * in.tau);
    if (in.sigma == 0.0) return std::max(in.spot - discounted_strike, 0.0);

    const double vst = in.sigma * std::sqrt(in.tau);
    const double d1 = d1_of(in, vst);
    const double d2 = d1 - vst;
    return in.spot * norm_cdf(d1) - discounted_strike * norm_cdf(d2);
}

BsGreeks bs_greeks(const BsInputs& in) {
    require_interior(in);
    const double sqrt_tau = std::sqrt(in.tau);
    const double vst = in.sigma * sqrt_tau;
    const double d1 = d1_of(in, vst);
    const double d2 = d1 - vst;
    const double n1 = norm_pdf(d1);
    const double discounted_strike = in.strike * std::exp(-in.rate * in.tau);

    BsGreeks g;
    g.delta = norm_cdf(d1);
    g.gamma = n1 / (in.spot * vst);
    g.vega = in.spot * n1 * sqrt_tau;
    g.theta = -in.spot * n1 * in.sigma / (2.0 * sqrt_tau) - in.rate * discounted_strike * norm_cdf(d2);
    return g;
}

double d1d2_call(const BsInputs& in) {
    require_interior(in);
    const double vst = in.sigma * std::sqrt(in.tau);
    const double d1 = d1_of(in, vst);
    return in.spot * norm_pdf(d1) / vst * (1.0 - d1 / vst);
}

}  // namespace arcvol
