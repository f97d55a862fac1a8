#pragma once

namespace arcvol {

double norm_pdf(double x);
/// Standard normal CDF via erfc; relative error near machine precision.
double norm_cdf(double x);

struct BsInputs {
    double spot = 100.0;
    double strike = 100.0;
    double rate = 0.0;
    double sigma = 0.2;
    double tau = 1.0;  // T - t
};

/// European call. tau = 0 gives the payoff, sigma = 0 the discounted-forward
/// intrinsic value max(x - K e^{-r tau}, 0). Throws DomainError on bad inputs.
double bs_call_price(const BsInputs& in);

/// Theta is the derivative with respect to valuation time t (= -d/dtau).
struct BsGreeks {
    double delta = 0.0;
    double gamma = 0.0;
    double vega = 0.0;
    double theta = 0.0;
};

/// Requires tau > 0 and sigma > 0.
BsGreeks bs_greeks(const BsInputs& in);

/// x d/dx (x^2 d^2/dx^2) applied to the call price:
/// x n(d1) / (sigma sqrt(tau)) * (1 - d1 / (sigma sqrt(tau))).
/// Requires tau > 0 and sigma > 0.
double d1d2_call(const BsInputs& in);

}  // namespace arcvol
