#include "arcvol/slow_factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace arcvol {

ParabolicSlowFactor parabolic_coefficients(const ModelParams& model) {
    const double dz = model.z0() - model.m_prime();
    const double k = model.k();
    return {0.5 * dz * k * k, -dz * k, model.z0()};
}

double slow_factor_value(const ParabolicSlowFactor& p, double t) {
    if (!(t >= 0.0)) throw Error(ErrorCode::DomainError, "slow factor time must be >= 0");
    return p.value(t);
}

TruncationReport truncation_report(const ModelParams& model, double t) {
    if (!(t >= 0.0)) throw Error(ErrorCode::DomainError, "truncation report time must be >= 0");
    const double dz = model.z0() - model.m_prime();
    const double kt = model.k() * t;

    TruncationReport rep;
    rep.exact_mean = model.m_prime() + dz * std::exp(-kt);
    rep.parabolic = parabolic_coefficients(model).value(t);
    rep.abs_error = std::abs(rep.parabolic - rep.exact_mean);
    rep.bound = std::abs(dz) * kt * kt * kt / 6.0;
    rep.bound_applies = kt <= 1.0;
    // Allow a few ulps of rounding in the two evaluations.
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(rep.exact_mean), std::abs(rep.parabolic));
    rep.within_bound = rep.abs_error <= rep.bound + slack;
    if (rep.bound_applies && !rep.within_bound) {
        throw Error(ErrorCode::DomainError,
                    "parabolic truncation error exceeds Taylor bound at k*t=" + std::to_string(kt));
    }
    return rep;
}

double gamma_coefficient(double k, double t, double floor) {
    const double kt = k * t;
    const double denom = 1.0 - kt;
    if (std::abs(denom) < floor) {
        throw Error(ErrorCode::SingularTime, "gamma: |1 - k*t| = " + std::to_string(std::abs(denom)) +
                                                 " below floor at k*t=" + std::to_string(kt));
    }
    return (1.0 - kt + 0.5 * kt * kt) / denom;
}

double L2TimeCheck::relative_gap() const noexcept {
    const double scale = std::max(std::abs(direct), std::abs(gamma_form));
    return scale == 0.0 ? 0.0 : std::abs(direct - gamma_form) / scale;
}

L2TimeCheck l2_time_coefficient_check(const ModelParams& model, double t) {
    const double gamma = gamma_coefficient(model.k(), t);
    const auto arc = parabolic_coefficients(model);
    const double slope = arc.slope(t) + ParabolicSlowFactor::zeta(t);
    if (std::abs(slope) < kSingularFloor) {
        throw Error(ErrorCode::SingularTime, "2At + B vanishes at t=" + std::to_string(t));
    }
    L2TimeCheck out;
    out.direct = 1.0 + model.k() * (model.m_prime() - arc.value(t)) / slope;
    out.gamma_form = 1.0 + gamma;
    return out;
}

}  // namespace arcvol
