#pragma once

#include <string>

#include "arcvol/averaging.hpp"
#include "arcvol/params.hpp"

namespace arcvol {

/// 1 + g = |kt - 2|^{(a - 2r)/k} e^{(2r - a)/(k |kt - 2|)} / e^{(2r - a) t / 2}.
/// Throws SingularTime when |kt - 2| < 1e-12.
double modification_factor(double t, double a, double r, double k);

/// 2 [ (1/k) log((kT - 2)/(kt - 2)) + (T - t)/((kT - 2)(kt - 2)) ].
/// Throws SingularTime near kt = 2 or kT = 2, LogDomain if the ratio is not positive.
double p1_time_factor(double t, double maturity, double k);

enum class VolFreeze {
    Pointwise,           // sigma_bar(z(t)) at the valuation time
    MaturityIntegrated,  // root-mean of sigma_bar^2(z(s)) over s in [t, T]
};

enum class CorrectionForm {
    OnBlackScholes,  // (1+g) [Q0 + sqrt(eps) tau V D1D2 Q0]
    OnModified,      // P0 + sqrt(eps) tau V D1D2 P0
};

struct PricerOptions {
    SigmaBarDefinition sigma_bar_definition = SigmaBarDefinition::RootMeanSquare;
    VolFreeze vol_freeze = VolFreeze::Pointwise;
    CorrectionForm correction_form = CorrectionForm::OnBlackScholes;
};

struct PriceDiagnostics {
    bool at_maturity = false;
    double z = 0.0;
    std::size_t quadrature_nodes = 0;
    std::size_t grid_cells = 0;
};

struct PriceBreakdown {
    double q0 = 0.0;          // classical Black-Scholes price at sigma_bar
    double mod_factor = 1.0;  // 1 + g
    double p0 = 0.0;          // (1 + g) q0
    double time_factor = 0.0;
    double sigma_bar = 0.0;
    double v = 0.0;
    double d1d2 = 0.0;        // D1 D2 Q0
    double correction = 0.0;  // sqrt(eps) P1
    double total = 0.0;
    PriceDiagnostics diagnostics;
};

/// Effective parameters at z = z(t) on the parabolic arc, honoring the
/// volatility-freeze option.
EffectiveParams effective_at_valuation(const OptionSpec& spec, const ModelParams& model,
                                       const VolFunction& f, const PricerOptions& opts = {});

/// (1 + g) times the Black-Scholes call at sigma_bar; the payoff at t = T.
double p0(const OptionSpec& spec, const ModelParams& model, const EffectiveParams& eff);

/// First-order price assembled from precomputed effective parameters.
PriceBreakdown price_first_order(const OptionSpec& spec, const ModelParams& model,
                                 const EffectiveParams& eff, const PricerOptions& opts = {});

PriceBreakdown price_first_order(const OptionSpec& spec, const ModelParams& model,
                                 const VolFunction& f, const PricerOptions& opts = {});

struct ResidualFlags {
    bool drop_gamma = false;         // use d/dt instead of (1 + gamma) d/dt
    bool unit_modification = false;  // use Q0 in place of (1 + g) Q0
};

/// Central-difference evaluation of
/// (1+gamma) dP0/dt + 1/2 sigma_bar^2 x^2 d2P0/dx2 + r (x dP0/dx - P0)
/// at an interior point, divided by r P0. sigma_bar is held at eff.sigma_bar.
double p0_pde_residual(const OptionSpec& spec, const ModelParams& model, const EffectiveParams& eff,
                       ResidualFlags flags = {});

}  // namespace arcvol
