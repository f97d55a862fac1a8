import math

import pytest

import arcvol


def test_modification_factor():
    for t in (0.0, 0.25, 0.5):
        assert abs(arcvol.modification_factor(t, 0.05, 0.0264, 0.008) - 0.934) <= 1e-3


def test_build_model_reports_every_issue():
    with pytest.raises(arcvol.ArcvolError) as info:
        arcvol.build_model(z0=0.18, a=0.0528)
    msg = str(info.value)
    assert "DegenerateSlowFactor" in msg
    assert "ModificationDegenerate" in msg


def test_price_breakdown():
    model = arcvol.build_model()
    spec = arcvol.OptionSpec(spot=100.0, strike=100.0, t=0.0, T=0.5)
    b = arcvol.price_first_order(spec, model, arcvol.VolFunction.separable_exponential())
    assert b.sigma_bar == pytest.approx(0.2 * math.exp(0.09), rel=1e-10)
    assert b.total == pytest.approx(b.p0 + b.correction, rel=1e-14)
    assert b.q0 == pytest.approx(arcvol.bs_call_price(100, 100, 0.0264, b.sigma_bar, 0.5), rel=1e-12)


def test_payoff_at_maturity():
    model = arcvol.build_model()
    spec = arcvol.OptionSpec(spot=120.0, strike=100.0, t=0.5, T=0.5)
    assert arcvol.price_first_order(spec, model, arcvol.VolFunction.y_constant()).total == 20.0


def test_bad_option_spec():
    with pytest.raises(arcvol.ArcvolError):
        arcvol.OptionSpec(spot=-1.0, strike=100.0, t=0.0, T=0.5)


def test_mc_reproducible():
    model = arcvol.build_model()
    spec = arcvol.OptionSpec(spot=100.0, strike=100.0, t=0.0, T=0.05)
    f = arcvol.VolFunction.y_constant()
    a = arcvol.mc_price(model, spec, f, n_paths=2000, antithetic=True)
    b = arcvol.mc_price(model, spec, f, n_paths=2000, antithetic=True)
    assert a.price == b.price
    bs = arcvol.bs_call_price(100, 100, 0.0264, 0.2, 0.05)
    assert abs(a.price - bs) <= 4 * a.std_error


def test_estimate_a_round_trip():
    quotes = []
    for t, T in ((0.0, 0.5), (0.25, 1.0)):
        for K in (90.0, 100.0, 110.0):
            q = arcvol.OptionQuote(t=t, T=T, K=K, mid=0.0, x=100.0, r=0.0264)
            mid = arcvol.calibration_model_price(q, 0.05, 0.008, 0.0, 0.2)
            quotes.append(arcvol.OptionQuote(t=t, T=T, K=K, mid=mid, x=100.0, r=0.0264))
    assert arcvol.estimate_a(quotes, k=0.008, r=0.0264, sigma_bar=0.2) == pytest.approx(0.05, abs=1e-5)
