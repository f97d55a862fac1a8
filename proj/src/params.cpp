#include "arcvol/params.hpp"

#include <cmath>
#include <sstream>

namespace arcvol {

namespace {

double correlation_determinant(double xy, double xz, double yz) {
    return 1.0 + 2.0 * xy * xz * yz - xy * xy - xz * xz - yz * yz;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

double validate_correlations(double rho_xy, double rho_xz, double rho_yz) {
    const double det = correlation_determinant(rho_xy, rho_xz, rho_yz);
    const bool bounded = std::abs(rho_xy) < 1.0 && std::abs(rho_xz) < 1.0 && std::abs(rho_yz) < 1.0;
    if (!bounded || !(det > 0.0)) {
        throw Error(ErrorCode::NonPositiveDefinite,
                    "correlation matrix not positive definite (determinant " + fmt(det) + ")");
    }
    return det;
}

std::vector<Issue> check_model(const RawModelParams& p) {
    std::vector<Issue> issues;
    auto add = [&](ErrorCode c, const char* field, std::string msg) {
        issues.push_back({c, field, std::move(msg)});
    };
    auto finite = [&](double v, const char* field) {
        if (!std::isfinite(v)) add(ErrorCode::InvalidParameter, field, "must be finite");
        return std::isfinite(v);
    };

    if (finite(p.epsilon, "epsilon") && !(p.epsilon > 0.0))
        add(ErrorCode::InvalidParameter, "epsilon", "must be > 0, got " + fmt(p.epsilon));
    finite(p.m, "m");
    if (finite(p.nu, "nu") && !(p.nu > 0.0))
        add(ErrorCode::InvalidParameter, "nu", "must be > 0, got " + fmt(p.nu));
    if (finite(p.k, "k") && !(p.k > 0.0))
        add(ErrorCode::InvalidParameter, "k", "must be > 0, got " + fmt(p.k));
    finite(p.m_prime, "m_prime");
    if (finite(p.eta, "eta") && !(p.eta >= 0.0))
        add(ErrorCode::InvalidParameter, "eta", "must be >= 0, got " + fmt(p.eta));

    const bool rhos_finite = finite(p.rho_xy, "rho_xy") & finite(p.rho_xz, "rho_xz") &
                             finite(p.rho_yz, "rho_yz");
    if (rhos_finite) {
        try {
            validate_correlations(p.rho_xy, p.rho_xz, p.rho_yz);
        } catch (const Error& e) {
            add(ErrorCode::NonPositiveDefinite, "rho", e.what());
        }
    }

    if (finite(p.z0, "z0") && std::isfinite(p.m_prime) && p.z0 == p.m_prime)
        add(ErrorCode::DegenerateSlowFactor, "z0",
            "z0 must differ from m_prime, otherwise the parabolic arc is flat");
    if (finite(p.r, "r") & finite(p.a, "a")) {
        if (p.a == 2.0 * p.r)
            add(ErrorCode::ModificationDegenerate, "a", "a must differ from 2r (" + fmt(2.0 * p.r) + ")");
    }
    return issues;
}

ModelParams build_model(const RawModelParams& raw) {
    auto issues = check_model(raw);
    if (!issues.empty()) throw ValidationError(std::move(issues));
    return ModelParams(raw);
}

std::vector<Issue> check_option(const OptionSpec& s) {
    std::vector<Issue> issues;
    if (!std::isfinite(s.spot) || !(s.spot > 0.0))
        issues.push_back({ErrorCode::InvalidParameter, "spot", "must be finite and > 0"});
    if (!std::isfinite(s.strike) || !(s.strike > 0.0))
        issues.push_back({ErrorCode::InvalidParameter, "strike", "must be finite and > 0"});
    if (!std::isfinite(s.t) || !(s.t >= 0.0))
        issues.push_back({ErrorCode::InvalidParameter, "t", "must be finite and >= 0"});
    if (!std::isfinite(s.maturity) || !(s.maturity >= s.t))
        issues.push_back({ErrorCode::InvalidParameter, "T", "must be finite and >= t"});
    return issues;
}

void validate_option(const OptionSpec& spec) {
    auto issues = check_option(spec);
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

}  // namespace arcvol
