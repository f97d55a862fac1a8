#pragma once

#include "arcvol/params.hpp"

namespace arcvol {

inline constexpr double kSingularFloor = 1e-12;

/// Quadratic arc Z_t = A t^2 + B t + C fitted to the OU mean of the slow factor
/// by second-order Taylor expansion around t = 0.
///
/// The remainder alpha_t (truncation delta_t plus the eta-driven randomness
/// beta_t) is fixed at zero here, and so is its time derivative zeta_t. The
/// Monte Carlo oracle can simulate the stochastic slow factor when the neglected
/// terms need to be measured.
struct ParabolicSlowFactor {
    double a_coef = 0.0;
    double b_coef = 0.0;
    double c_coef = 0.0;

    double value(double t) const noexcept { return (a_coef * t + b_coef) * t + c_coef; }
    /// dZ/dt = 2 A t + B
    double slope(double t) const noexcept { return 2.0 * a_coef * t + b_coef; }

    static constexpr double alpha(double /*t*/) noexcept { return 0.0; }
    static constexpr double zeta(double /*t*/) noexcept { return 0.0; }
};

ParabolicSlowFactor parabolic_coefficients(const ModelParams& model);

double slow_factor_value(const ParabolicSlowFactor& p, double t);

struct TruncationReport {
    double exact_mean = 0.0;  // m' + (z0 - m') exp(-k t)
    double parabolic = 0.0;
    double abs_error = 0.0;
    double bound = 0.0;       // |z0 - m'| (k t)^3 / 6
    bool bound_applies = false;  // k t <= 1
    bool within_bound = true;
};

/// Throws Error(DomainError) if the bound applies but is violated.
TruncationReport truncation_report(const ModelParams& model, double t);

/// gamma = (1 - kt + k^2 t^2 / 2) / (1 - kt). Throws SingularTime near kt = 1.
double gamma_coefficient(double k, double t, double floor = kSingularFloor);

/// Time-derivative coefficient of the transformed pricing operator, computed
/// two ways: directly as 1 + k (m' - z(t)) / (2 A t + B), and as 1 + gamma.
struct L2TimeCheck {
    double direct = 0.0;
    double gamma_form = 0.0;

    double relative_gap() const noexcept;
};

L2TimeCheck l2_time_coefficient_check(const ModelParams& model, double t);

}  // namespace arcvol
