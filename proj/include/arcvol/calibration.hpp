#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace arcvol {

/// One market observation. Times in years from the anchor date of z0.
struct OptionQuote {
    double t = 0.0;
    double maturity = 0.0;
    double strike = 0.0;
    double mid = 0.0;
    double spot = 0.0;
    double rate = 0.0;
};

struct RejectedRow {
    std::size_t line = 0;
    std::string reason;
};

struct ChainLoad {
    std::vector<OptionQuote> quotes;
    std::vector<RejectedRow> rejected;
};

/// Reads a `t,T,K,mid,x,r` chain. Rows breaking the quote invariants are
/// rejected with their line number; malformed rows throw ParseError and a
/// chain with no accepted rows throws EmptyChain.
ChainLoad parse_chain(std::istream& in, double intrinsic_tolerance = 1e-8);
ChainLoad load_chain(const std::filesystem::path& path, double intrinsic_tolerance = 1e-8);

void write_chain(std::ostream& out, const std::vector<OptionQuote>& quotes);

/// (1 + g(t)) [Q0 + v_eff tau(t, T, k) D1 D2 Q0] with the quote's rate.
double calibration_model_price(const OptionQuote& q, double a, double k, double v_eff, double sigma_bar);

struct PerStrikeA {
    double strike = 0.0;
    double a_hat = 0.0;
    std::size_t quotes = 0;
};

struct AEstimate {
    double a_hat = 0.0;
    double objective = 0.0;  // root-mean-square price error
    std::vector<PerStrikeA> per_strike;
};

struct ABounds {
    double lo = -0.5;
    double hi = 0.5;
    double gap = 1e-4;  // excluded half-width around 2r
};

/// Least-squares fit of a with k, r and sigma_bar held fixed, by golden-section
/// search on each side of the excluded point 2r. Throws InsufficientData or
/// NoInteriorMinimum.
AEstimate estimate_a(const std::vector<OptionQuote>& quotes, double k, double r, double sigma_bar,
                     const ABounds& bounds = {});

/// Implied volatility of the quote whose strike is closest to the spot.
double near_money_implied_vol(const std::vector<OptionQuote>& quotes);

/// Black-Scholes implied volatility by bracketing root search.
double implied_vol(double price, double spot, double strike, double rate, double tau);

enum class QuoteWeighting { Uniform, Vega };

struct CalibBounds {
    ABounds a;
    double k_lo = 1e-6;
    double k_hi = 1.0;
    double v_lo = -5.0;
    double v_hi = 5.0;
    double sigma_lo = 0.01;
    double sigma_hi = 2.0;
};

struct CalibOptions {
    CalibBounds bounds;
    std::uint64_t seed = 7;
    std::size_t restarts = 3;
    std::size_t max_iterations = 20000;
    double simplex_tolerance = 1e-12;
    QuoteWeighting weighting = QuoteWeighting::Uniform;
    std::optional<double> fixed_a;
    std::optional<double> fixed_k;
    std::optional<double> fixed_v_eff;
    std::optional<double> fixed_sigma_bar;
};

struct CalibResult {
    double a_hat = 0.0;
    double k_hat = 0.0;
    double v_eff_hat = 0.0;  // sqrt(epsilon) V
    double sigma_bar_hat = 0.0;
    double objective = 0.0;  // root-mean-square price error
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> restart_start_objectives;
    std::vector<double> restart_objectives;
};

/// Weighted root-mean-square error of calibration_model_price against mids.
double calibration_objective(const std::vector<OptionQuote>& quotes, double a, double k, double v_eff,
                             double sigma_bar, QuoteWeighting weighting = QuoteWeighting::Uniform);

/// Fits (a, k, v_eff, sigma_bar) by bounded Nelder-Mead with random restarts.
/// Throws InsufficientData. When the iteration cap is hit the best point is
/// returned with converged = false.
CalibResult calibrate_effective(const std::vector<OptionQuote>& quotes, const CalibOptions& opts = {});

/// Flat key=value report.
void write_calib_report(std::ostream& out, const CalibResult& res);

}  // namespace arcvol
