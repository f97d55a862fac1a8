#include "arcvol/pricer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "arcvol/black_scholes.hpp"
#include "arcvol/slow_factor.hpp"
#include "quadrature.hpp"

namespace arcvol {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

double modification_factor(double t, double a, double r, double k) {
    const double gap = std::abs(k * t - 2.0);
    if (gap < kSingularFloor)
        throw Error(ErrorCode::SingularTime, "modification factor: |k*t - 2| = " + num(gap) + " at t=" + num(t));
    const double s = 2.0 * r - a;
    return std::pow(gap, -s / k) * std::exp(s / (k * gap)) / std::exp(s * t / 2.0);
}

double p1_time_factor(double t, double maturity, double k) {
    const double at_t = k * t - 2.0;
    const double at_T = k * maturity - 2.0;
    if (std::abs(at_t) < kSingularFloor)
        throw Error(ErrorCode::SingularTime, "P1 time factor: |k*t - 2| = " + num(std::abs(at_t)));
    if (std::abs(at_T) < kSingularFloor)
        throw Error(ErrorCode::SingularTime, "P1 time factor: |k*T - 2| = " + num(std::abs(at_T)));
    const double ratio = at_T / at_t;
    if (!(ratio > 0.0))
        throw Error(ErrorCode::LogDomain, "P1 time factor: (kT - 2)/(kt - 2) = " + num(ratio) + " is not positive");
    if (t == maturity) return 0.0;
    return 2.0 * (std::log(ratio) / k + (maturity - t) / (at_T * at_t));
}

namespace {

void check_entry(const OptionSpec& spec, const ModelParams& model) {
    validate_option(spec);
    if (!(model.k() * spec.maturity < 2.0)) {
        throw Error(ErrorCode::LogDomain,
                    "k*T = " + num(model.k() * spec.maturity) + " must be < 2 for the P1 logarithm");
    }
}

double arc_z(const ModelParams& model, double t) {
    return slow_factor_value(parabolic_coefficients(model), t);
}

}  // namespace

EffectiveParams effective_at_valuation(const OptionSpec& spec, const ModelParams& model,
                                       const VolFunction& f, const PricerOptions& opts) {
    validate_option(spec);
    const double z = arc_z(model, spec.t);
    auto eff = effective_params(f, z, model.m(), model.nu(), model.rho_xy(), opts.sigma_bar_definition);
    if (opts.vol_freeze == VolFreeze::MaturityIntegrated && spec.tau() > 0.0) {
        const auto& rule = detail::gauss_legendre(16);
        const double half = 0.5 * spec.tau();
        const double mid = spec.t + half;
        detail::CompensatedSum var;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double s = mid + half * rule.nodes[i];
            const double sb = sigma_bar(f, arc_z(model, s), model.m(), model.nu(), opts.sigma_bar_definition);
            var.add(0.5 * rule.weights[i] * sb * sb);
        }
        eff.sigma_bar = std::sqrt(var.value());
    }
    return eff;
}

double p0(const OptionSpec& spec, const ModelParams& model, const EffectiveParams& eff) {
    check_entry(spec, model);
    if (spec.t == spec.maturity) return std::max(spec.spot - spec.strike, 0.0);
    const double q0 = bs_call_price({spec.spot, spec.strike, model.r(), eff.sigma_bar, spec.tau()});
    return modification_factor(spec.t, model.a(), model.r(), model.k()) * q0;
}

PriceBreakdown price_first_order(const OptionSpec& spec, const ModelParams& model,
                                 const EffectiveParams& eff, const PricerOptions& opts) {
    check_entry(spec, model);
    PriceBreakdown out;
    out.sigma_bar = eff.sigma_bar;
    out.v = eff.v;
    out.diagnostics.z = eff.z;
    out.diagnostics.quadrature_nodes = eff.quadrature_nodes;
    out.diagnostics.grid_cells = eff.grid_cells;

    if (spec.t == spec.maturity) {
        const double payoff = std::max(spec.spot - spec.strike, 0.0);
        out.q0 = payoff;
        out.mod_factor = 1.0;
        out.p0 = payoff;
        out.time_factor = 0.0;
        out.total = payoff;
        out.diagnostics.at_maturity = true;
        return out;
    }

    const BsInputs bs{spec.spot, spec.strike, model.r(), eff.sigma_bar, spec.tau()};
    out.q0 = bs_call_price(bs);
    out.mod_factor = modification_factor(spec.t, model.a(), model.r(), model.k());
    out.p0 = out.mod_factor * out.q0;
    out.time_factor = p1_time_factor(spec.t, spec.maturity, model.k());
    out.d1d2 = eff.sigma_bar > 0.0 ? d1d2_call(bs) : 0.0;

    const double root_eps = std::sqrt(model.epsilon());
    const double scaled = root_eps * out.time_factor * out.v;
    if (opts.correction_form == CorrectionForm::OnBlackScholes) {
        out.correction = out.mod_factor * scaled * out.d1d2;
        out.total = out.mod_factor * (out.q0 + scaled * out.d1d2);
    } else {
        // D1 D2 is linear, so D1 D2 P0 = (1 + g) D1 D2 Q0.
        const double d1d2_p0 = out.mod_factor * out.d1d2;
        out.correction = scaled * d1d2_p0;
        out.total = out.p0 + out.correction;
    }
    return out;
}

PriceBreakdown price_first_order(const OptionSpec& spec, const ModelParams& model,
                                 const VolFunction& f, const PricerOptions& opts) {
    check_entry(spec, model);
    const auto eff = effective_at_valuation(spec, model, f, opts);
    return price_first_order(spec, model, eff, opts);
}

double p0_pde_residual(const OptionSpec& spec, const ModelParams& model, const EffectiveParams& eff,
                       ResidualFlags flags) {
    check_entry(spec, model);
    if (!(spec.t > 0.0 && spec.t < spec.maturity))
        throw Error(ErrorCode::DomainError, "PDE residual needs 0 < t < T");

    const double r = model.r();
    auto price = [&](double t, double x) {
        const double q0 = bs_call_price({x, spec.strike, r, eff.sigma_bar, spec.maturity - t});
        return flags.unit_modification ? q0 : modification_factor(t, model.a(), r, model.k()) * q0;
    };

    const double x = spec.spot;
    const double t = spec.t;
    const double hx = 1e-4 * x;
    const double ht = 1e-4 * std::min(t, spec.maturity - t);

    const double v0 = price(t, x);
    const double dt = (price(t + ht, x) - price(t - ht, x)) / (2.0 * ht);
    const double dx = (price(t, x + hx) - price(t, x - hx)) / (2.0 * hx);
    const double dxx = (price(t, x + hx) - 2.0 * v0 + price(t, x - hx)) / (hx * hx);

    const double time_coef = flags.drop_gamma ? 1.0 : 1.0 + gamma_coefficient(model.k(), t);
    const double residual =
        time_coef * dt + 0.5 * eff.sigma_bar * eff.sigma_bar * x * x * dxx + r * (x * dx - v0);
    return std::abs(residual) / (std::abs(r * v0) > 0.0 ? std::abs(r * v0) : 1.0);
}

}  // namespace arcvol
