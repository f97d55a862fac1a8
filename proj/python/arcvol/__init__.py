"""First-order option pricing under a fast/slow stochastic volatility model."""

from ._core import (
    ArcvolError,
    CalibResult,
    McEstimate,
    ModelParams,
    OptionQuote,
    OptionSpec,
    PriceBreakdown,
    VolFunction,
    bs_call_price,
    build_model,
    calibrate_effective,
    calibration_model_price,
    d1d2_call,
    effective_v,
    estimate_a,
    gamma_coefficient,
    mc_price,
    modification_factor,
    p1_time_factor,
    parabolic_coefficients,
    price_first_order,
    sigma_bar,
    validate_correlations,
)

__all__ = [name for name in dir() if not name.startswith("_")]
