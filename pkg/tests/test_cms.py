from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from multicurve.cms import (
    AnnuityExponent,
    CmsMode,
    CmsSwapSpec,
    FbarSpec,
    SpreadInputs,
    SpreadOptionSpec,
    SpreadVariant,
    calibrate_flat_correlation,
    cms_breakdown,
    cms_convexity_expectation,
    cms_fair_spread,
    fbar,
    fbar_derivatives,
    fbar_spec_for,
    price_from_inputs,
    replicate_expectation,
    spread_option_integral,
    spread_option_price,
)
from multicurve.curves import flat_curve_set, modified_forward, discount_factor
from multicurve.errors import CalibrationWarning, InputError
from multicurve.timegrid import Tenor
from multicurve.volmodels import SabrSlice, SabrSurface, forward_swap_rate


class _ZeroVol:
    """Surface stub returning a zero smile everywhere."""

    def slice(self, expiry, tenor):
        return lambda k: np.zeros_like(np.asarray(k, float))

    def vol(self, expiry, tenor, strike, forward):
        return 0.0


def _surface(tenors=(2.0, 5.0, 10.0), alpha=0.04, beta=0.5, rho=-0.2, eps=0.4):
    return SabrSurface({(1.0, c): SabrSlice(alpha, beta, rho, eps, 1.0, c) for c in tenors})


def test_fbar_at_zero_annual():
    spec = FbarSpec(2.0, 2.25, 0.25, (1.0,) * 5)
    assert fbar(0.0, spec) == pytest.approx(1 / 5, rel=1e-15)


def test_fbar_exponent_zero_period():
    spec = FbarSpec(1.0, 1.25, 0.25, (0.5,))
    # the single period has power i - c = 0, so the denominator is its accrual
    x = np.array([0.0, 0.01, 0.05])
    assert np.allclose(fbar(x, spec) * 0.5, (1 + 0.25 * x) ** -1, rtol=1e-15)


@pytest.mark.parametrize("exponent", list(AnnuityExponent))
def test_fbar_derivatives_match_finite_differences(exponent):
    spec = fbar_spec_for(2.0, 2.5, 12.0, 0.25, exponent)
    h = 1e-6
    for x in np.linspace(0.001, 0.12, 25):
        f0, f1, f2 = fbar_derivatives(x, spec)
        fd1 = (fbar(x + h, spec) - fbar(x - h, spec)) / (2 * h)
        fd2 = (fbar(x + h, spec) - 2 * f0 + fbar(x - h, spec)) / h**2
        assert fd1 == pytest.approx(f1, rel=1e-6)
        assert fd2 == pytest.approx(f2, rel=1e-3)


def test_fbar_domain_error():
    with pytest.raises(InputError):
        fbar(-5.0, FbarSpec(1.0, 1.25, 0.25, (1.0,)))


def test_zero_vol_returns_forward():
    spec = fbar_spec_for(5.0, 5.25, 15.0, 0.25)
    assert replicate_expectation(0.03, spec, lambda k: np.zeros_like(k)).value == 0.03
    r = replicate_expectation(0.03, spec, lambda k: np.full_like(k, 1e-14))
    assert r.value == pytest.approx(0.03, rel=1e-8)


def test_constant_fbar_gives_forward():
    # paid at fixing on a one-period swap: fbar is constant, the weight vanishes
    spec = FbarSpec(3.0, 3.0, 0.25, (1.0,))
    r = replicate_expectation(0.025, spec, lambda k: np.full_like(k, 0.09))
    assert r.value == pytest.approx(0.025, abs=1e-15)
    assert r.integral == 0.0


@pytest.mark.parametrize("exponent", list(AnnuityExponent))
def test_lognormal_density_oracle(exponent):
    S0, T, sig = 0.03, 5.0, 0.25
    spec = fbar_spec_for(T, T + 0.25, T + 10.0, 0.25, exponent)
    rep = replicate_expectation(S0, spec, lambda k: np.full_like(k, sig * sig * T)).value
    s = sig * math.sqrt(T)

    def dens(y):
        x = S0 * math.exp(-0.5 * s * s + s * y)
        return x * fbar(x, spec) * math.exp(-0.5 * y * y) / math.sqrt(2 * math.pi)

    direct = integrate.quad(dens, -12, 12, epsabs=0, epsrel=1e-12, limit=200)[0] / fbar(S0, spec)
    assert rep == pytest.approx(direct, rel=1e-6)


def test_adjustment_monotone_in_alpha(ref_curves):
    S0 = forward_swap_rate(ref_curves, 5.0, 10.0)
    adj = {ex: [cms_convexity_expectation(ref_curves, SabrSlice(a, 1.0, 0.0, 0.0), 5.25, (5.0, 15.0), exponent=ex) - S0
                for a in (0.1, 0.2, 0.3)] for ex in AnnuityExponent}
    assert 0 < adj[AnnuityExponent.STANDARD][0] < adj[AnnuityExponent.STANDARD][1] < adj[AnnuityExponent.STANDARD][2]
    # the printed annuity powers flip the slope of fbar, so the adjustment grows negative
    assert 0 > adj[AnnuityExponent.PRINTED][0] > adj[AnnuityExponent.PRINTED][1] > adj[AnnuityExponent.PRINTED][2]


def test_cms_spec_validation():
    with pytest.raises(InputError):
        CmsSwapSpec(0, 10)
    with pytest.raises(InputError):
        CmsSwapSpec(4, 0.5)


def test_cms_mode_degeneracy():
    cs = flat_curve_set(0.025, {Tenor.M3: 0.0, Tenor.M6: 0.0})
    surf = _surface()
    spec = CmsSwapSpec(20, 10.0)
    vals = [cms_fair_spread(cs, surf, spec, m) for m in CmsMode]
    assert max(vals) - min(vals) < 1e-10


def test_zero_vol_direct_summation():
    cs = flat_curve_set(0.02, {Tenor.M3: 0.0, Tenor.M6: 0.004})
    spec = CmsSwapSpec(20, 10.0)
    got = cms_fair_spread(cs, _ZeroVol(), spec)
    pay = np.arange(1, 21) * 0.25
    fix = pay - 0.25
    s = np.array([forward_swap_rate(cs, t, 10.0) for t in fix])
    f = np.asarray(modified_forward(cs, Tenor.M3, fix, pay))
    p = np.asarray(discount_factor(cs.discount, pay))
    assert got == pytest.approx(np.dot(s - f, p) / p.sum(), abs=1e-15)
    assert 0.0035 < got < 0.0045


def test_hybrid_vs_multi_decomposition(ref_curves, ref_single6m, reference):
    surf = reference.sabr_surface()
    spec = CmsSwapSpec(40, 10.0)
    m = cms_breakdown(ref_curves, surf, spec, CmsMode.MULTI)
    h = cms_breakdown(ref_curves, surf, spec, CmsMode.HYBRID, ref_single6m)
    assert np.array_equal(m.float_forwards, h.float_forwards)
    assert np.array_equal(m.discounts, h.discounts)
    assert not np.allclose(m.swap_forwards, h.swap_forwards)
    diff = np.dot(h.expectations - m.expectations, m.discounts) / m.discounts.sum()
    assert h.spread - m.spread == pytest.approx(diff, abs=1e-15)


def test_spread_deep_otm():
    assert spread_option_integral(0.03, 0.02, 0.2, 0.2, 0.5, 0.3, 2.0) < 1e-10


def test_spread_near_perfect_correlation_is_stable():
    near = spread_option_integral(0.03, 0.02, 0.2, 0.25, -1 + 1e-9, 0.005, 3.0)
    edge = spread_option_integral(0.03, 0.02, 0.2, 0.25, -1.0, 0.005, 3.0)
    assert near == pytest.approx(edge, rel=1e-6)


@pytest.mark.parametrize("variant", list(SpreadVariant))
def test_spread_identical_underlyings(variant):
    assert spread_option_integral(0.03, 0.03, 0.2, 0.2, 1.0, 0.0, 2.0, variant) == pytest.approx(0.0, abs=1e-15)


def test_spread_monotonicity_scans():
    K = np.linspace(-0.01, 0.02, 13)
    pk = [spread_option_integral(0.03, 0.02, 0.2, 0.25, 0.7, k, 3.0) for k in K]
    assert np.all(np.diff(pk) < 0)
    # increasing in sigma_b once e_b sigma_b exceeds rho e_c sigma_c (here sigma_b > 0.117)
    ps = [spread_option_integral(0.03, 0.02, s, 0.25, 0.7, 0.005, 3.0) for s in np.linspace(0.15, 0.5, 8)]
    assert np.all(np.diff(ps) > 0)
    pr = [spread_option_integral(0.03, 0.02, 0.2, 0.25, r, 0.005, 3.0, SpreadVariant.MARTINGALE) for r in np.linspace(-0.9, 0.95, 12)]
    assert np.all(np.diff(pr) < 0)


def test_spread_martingale_small_mc(rng):
    e_b, e_c, sb, sc, rho, K, T = 0.03, 0.02, 0.2, 0.25, 0.6, 0.005, 3.0
    n = 400_000
    z1 = rng.standard_normal(n)
    z2 = rho * z1 + math.sqrt(1 - rho * rho) * rng.standard_normal(n)
    sb_T = e_b * np.exp(-0.5 * sb * sb * T + sb * math.sqrt(T) * z1)
    sc_T = e_c * np.exp(-0.5 * sc * sc * T + sc * math.sqrt(T) * z2)
    pay = np.maximum(sb_T - sc_T - K, 0.0)
    mc, se = pay.mean(), pay.std(ddof=1) / math.sqrt(n)
    assert abs(spread_option_integral(e_b, e_c, sb, sc, rho, K, T, SpreadVariant.MARTINGALE) - mc) < 3 * se


def test_spread_price_uses_spec_rho(ref_curves, reference):
    surf = reference.sabr_surface()
    spec = SpreadOptionSpec(2.0, 10.0, 2.0, 0.005, rho=0.8)
    assert spread_option_price(ref_curves, surf, spec) > 0
    with pytest.raises(InputError):
        spread_option_price(ref_curves, surf, SpreadOptionSpec(2.0, 10.0, 2.0, 0.005))
    with pytest.raises(InputError):
        SpreadOptionSpec(2.0, 10.0, 2.0, 0.005, rho=1.5)


def _inputs():
    return {f"q{i}": SpreadInputs(math.exp(-0.02 * T), 0.035, 0.025, 0.18, 0.22, T, 0.005)
            for i, T in enumerate((1.0, 2.0, 5.0))}


@pytest.mark.parametrize("variant", list(SpreadVariant))
def test_flat_correlation_round_trip(variant):
    ins = _inputs()
    quotes = [SpreadOptionSpec(i.expiry, 10.0, 2.0, i.strike, price_from_inputs(i, 0.8, variant), id=k) for k, i in ins.items()]
    rho = calibrate_flat_correlation(quotes, variant=variant, inputs=ins)
    assert rho[0.005] == pytest.approx(0.8, abs=1e-6)


def test_flat_correlation_zero():
    ins = _inputs()
    k, i = next(iter(ins.items()))
    q = SpreadOptionSpec(i.expiry, 10.0, 2.0, i.strike, price_from_inputs(i, 0.0), id=k)
    assert calibrate_flat_correlation([q], inputs=ins)[0.005] == pytest.approx(0.0, abs=1e-6)


def test_flat_correlation_clips_at_envelope():
    ins = _inputs()
    quotes = [SpreadOptionSpec(i.expiry, 10.0, 2.0, i.strike, 1.2 * price_from_inputs(i, -1.0), id=k) for k, i in ins.items()]
    with pytest.warns(CalibrationWarning):
        rho = calibrate_flat_correlation(quotes, inputs=ins)
    assert rho[0.005] == -1.0


def test_flat_correlation_needs_prices():
    with pytest.raises(InputError):
        calibrate_flat_correlation([SpreadOptionSpec(1.0, 10.0, 2.0, 0.0)], inputs={})


def test_reference_spread_quotes_recover_correlation(ref_quotes, ref_curves, reference):
    specs = [s for s in ref_quotes.spread_option_specs() if s.price is not None]
    assert specs
    with warnings.catch_warnings():
        warnings.simplefilter("error", CalibrationWarning)
        rho = calibrate_flat_correlation(specs, ref_curves, reference.sabr_surface())
    for r in rho.values():
        assert r == pytest.approx(reference.spread_correlation, abs=1e-6)
