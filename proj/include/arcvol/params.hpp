#pragma once

#include <vector>

#include "arcvol/errors.hpp"

namespace arcvol {

/// Unvalidated model inputs. Times in years, rates continuously compounded.
struct RawModelParams {
    double epsilon = 0.01;   // fast time scale
    double m = 0.0;          // long-run mean of the fast factor Y
    double nu = 0.3;         // long-run std dev of Y
    double k = 0.008;        // slow mean-reversion rate
    double m_prime = 0.18;   // long-run mean of the slow factor Z
    double eta = 0.0;        // vol-of-vol of Z
    double rho_xy = -0.5;
    double rho_xz = 0.0;
    double rho_yz = 0.0;
    double z0 = 0.2;
    double r = 0.0264;
    double a = 0.05;         // empirical modification constant
};

/// Validated, immutable model parameters. Only obtainable through build_model.
class ModelParams {
public:
    double epsilon() const noexcept { return p_.epsilon; }
    double m() const noexcept { return p_.m; }
    double nu() const noexcept { return p_.nu; }
    double k() const noexcept { return p_.k; }
    double m_prime() const noexcept { return p_.m_prime; }
    double eta() const noexcept { return p_.eta; }
    double rho_xy() const noexcept { return p_.rho_xy; }
    double rho_xz() const noexcept { return p_.rho_xz; }
    double rho_yz() const noexcept { return p_.rho_yz; }
    double z0() const noexcept { return p_.z0; }
    double r() const noexcept { return p_.r; }
    double a() const noexcept { return p_.a; }

    const RawModelParams& raw() const noexcept { return p_; }

private:
    explicit ModelParams(const RawModelParams& p) : p_(p) {}
    friend ModelParams build_model(const RawModelParams& raw);

    RawModelParams p_;
};

/// Determinant of the 3x3 Brownian correlation matrix,
/// 1 + 2 rxy rxz ryz - rxy^2 - rxz^2 - ryz^2.
/// Throws Error(NonPositiveDefinite) unless it is > 0 and every |rho| < 1.
double validate_correlations(double rho_xy, double rho_xz, double rho_yz);

/// Every violated invariant of `raw`, in field order. Empty means valid.
std::vector<Issue> check_model(const RawModelParams& raw);

/// Throws ValidationError listing all violations.
ModelParams build_model(const RawModelParams& raw);

struct OptionSpec {
    double spot = 100.0;
    double strike = 100.0;
    double t = 0.0;         // valuation time
    double maturity = 0.5;  // T

    double tau() const noexcept { return maturity - t; }
};

std::vector<Issue> check_option(const OptionSpec& spec);

/// Throws ValidationError if the spec is malformed.
void validate_option(const OptionSpec& spec);

}  // namespace arcvol
