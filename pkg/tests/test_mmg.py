from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from multicurve.cms import CmsSwapSpec, cms_fair_spread
from multicurve.curves import discount_factor, flat_curve_set, modified_forward
from multicurve.errors import ConfigurationError, InputError
from multicurve.mmg import (
    McConfig,
    MmgModel,
    MmgScenario,
    PricingMethod,
    cms_spread_mmg,
    fra_rate_gaussian,
    futures_convexity_adjustment,
    mc_mean,
    mc_zcb,
    mmg_implied_vol,
    simulate_paths,
    swaption_price_mmg,
)
from multicurve.mmg.model import (
    mixture_expectation,
    pseudo_discount,
    theta_factor,
    theta_factor_mmg,
    zcb_price,
)
from multicurve.timegrid import Tenor
from multicurve.volmodels import Settlement, SwaptionQuote, physical_annuity


def one_factor(a=0.1, sigma=0.01, weight=1.0):
    return MmgScenario(weight, (a,), ((sigma,),))


def two_factor(weight=1.0, a=(0.05, 0.4), sigma=(0.008, 0.006), rho=-0.4):
    return MmgScenario(weight, a, tuple((s,) for s in sigma), ((1.0, rho), (rho, 1.0)))


@pytest.fixture(scope="module")
def mix(ref_curves):
    return MmgModel((two_factor(0.4, sigma=(0.004, 0.003)), two_factor(0.6, sigma=(0.012, 0.009))), ref_curves)


class _ZeroVol:
    def slice(self, expiry, tenor):
        return lambda k: np.zeros_like(np.asarray(k, float))


def test_curve_fit_at_time_zero(mix, ref_curves):
    pillars = np.asarray(ref_curves.discount.pillar_times, float)
    pillars = pillars[pillars > 0]
    p0 = np.asarray(discount_factor(ref_curves.discount, pillars))
    for i, s in enumerate(mix.scenarios):
        got = zcb_price(mix, i, np.zeros(s.q), 0.0, pillars)
        assert np.max(np.abs(got - p0)) < 1e-12


@pytest.mark.parametrize("tenor", [Tenor.M3, Tenor.M6])
def test_pseudo_discount_compounds_forwards(ref_curves, tenor):
    d = tenor.year_fraction
    T = np.linspace(d, 30.0, 97)
    ratio = np.asarray(pseudo_discount(ref_curves, tenor, T - d)) / np.asarray(pseudo_discount(ref_curves, tenor, T))
    fwd = np.asarray(modified_forward(ref_curves, tenor, T - d, T))
    assert np.max(np.abs(ratio - (1 + d * fwd))) < 1e-12


def test_deterministic_limit(ref_curves):
    m = MmgModel((one_factor(sigma=0.0),), ref_curves)
    T = np.array([3.0, 5.0, 10.0])
    got = zcb_price(m, 0, np.zeros(1), 2.0, T)
    expect = np.asarray(discount_factor(ref_curves.discount, T)) / float(discount_factor(ref_curves.discount, 2.0))
    assert np.allclose(got, expect, rtol=1e-15, atol=0)
    with pytest.raises(InputError):
        zcb_price(m, 0, np.zeros(1), 2.0, 1.0)


def test_theta_is_one_under_mmg(mix):
    for i in range(2):
        assert theta_factor_mmg(mix, i, 0.5, 3.0, 0.5) == 1.0
    assert theta_factor(lambda u, v: 0.0, lambda u, v: 0.0, 0.0, 0.0, 1.0, 0.5) == 1.0


def test_theta_flat_vol_closed_form():
    # exp(int_0^.5 (.5 sigma)(sigma (1 - u)) du) for sigma = 1%
    sig = 0.01
    expect = math.exp(0.5 * sig * sig * (0.5 - 0.125))
    got = theta_factor(lambda u, v: sig, lambda u, v: sig, 0.0, 0.0, 1.0, 0.5)
    assert got == pytest.approx(expect, rel=1e-14)


def test_theta_nested_oracle():
    sig, a = 0.01, 0.3
    vol = lambda u, v: sig * math.exp(-a * (v - u))
    got = theta_factor(vol, vol, 0.0, 0.0, 1.0, 0.5)

    def outer(u):
        inner = integrate.quad(lambda v: vol(u, v), 0.5, 1.0, epsabs=1e-15)[0]
        th = integrate.quad(lambda s: vol(u, s), u, 1.0, epsabs=1e-15)[0]
        return inner * th

    expect = math.exp(integrate.quad(outer, 0.0, 0.5, epsabs=1e-16, epsrel=1e-13)[0])
    assert got == pytest.approx(expect, abs=1e-10)


def test_mixture_identities(ref_curves):
    q = SwaptionQuote(2.0, 5.0, 0.2, 0.0025, settlement=Settlement.PHYSICAL)
    s1, s2 = two_factor(0.3, sigma=(0.005, 0.004)), two_factor(0.7, sigma=(0.011, 0.008))
    mix = swaption_price_mmg(MmgModel((s1, s2), ref_curves), q).value
    p1 = swaption_price_mmg(MmgModel((two_factor(1.0, sigma=(0.005, 0.004)),), ref_curves), q).value
    p2 = swaption_price_mmg(MmgModel((two_factor(1.0, sigma=(0.011, 0.008)),), ref_curves), q).value
    assert abs(mix - (0.3 * p1 + 0.7 * p2)) < 1e-14
    same = swaption_price_mmg(MmgModel((two_factor(0.25), two_factor(0.75)), ref_curves), q).value
    solo = swaption_price_mmg(MmgModel((two_factor(1.0),), ref_curves), q).value
    assert abs(same - solo) < 1e-14


def test_mixture_expectation_weights():
    assert mixture_expectation([1.0], lambda i, s: 3.5) == 3.5
    assert mixture_expectation([0.2, 0.8], lambda i, s: [1.0, 2.0][i]) == pytest.approx(1.8, abs=1e-15)
    with pytest.raises(ConfigurationError):
        mixture_expectation([0.2, 0.7], lambda i, s: 1.0)
    # linear in the weights
    f = lambda w: mixture_expectation([w, 1 - w], lambda i, s: [0.3, 1.7][i])
    assert f(0.25) - f(0.2) == pytest.approx(f(0.6) - f(0.55), abs=1e-15)


def test_scenario_validation():
    with pytest.raises(ConfigurationError):
        MmgScenario(1.0, (-0.1,), ((0.01,),))
    with pytest.raises(ConfigurationError):
        MmgScenario(1.0, (0.1, 0.2), ((0.01,), (0.01,)), ((1.0, 1.2), (1.2, 1.0)))
    with pytest.raises(ConfigurationError):
        MmgScenario(0.0, (0.1,), ((0.01,),))
    with pytest.raises(ConfigurationError):
        MmgModel((one_factor(weight=0.5),), flat_curve_set(0.02))


def test_zero_vol_swaption_is_intrinsic(ref_curves):
    m = MmgModel((two_factor(1.0, sigma=(0.0, 0.0)),), ref_curves)
    q = SwaptionQuote(3.0, 5.0, 0.2, -0.005, settlement=Settlement.PHYSICAL)
    p = swaption_price_mmg(m, q)
    sched = q.fixed_schedule()
    ann = physical_annuity(ref_curves, 3.0, np.asarray(sched.end_times if hasattr(sched, "end_times") else sched.pay_times), sched.accrual_fractions)
    expect = p.details["discount"] * ann * (p.details["forward"] - p.details["strike"])
    assert p.value == pytest.approx(expect, rel=1e-10)


def test_quadrature_vs_mc_caplet(ref_curves):
    m = MmgModel((one_factor(0.1, 0.012),), ref_curves)
    q = SwaptionQuote(2.0, 1.0, 0.2, settlement=Settlement.PHYSICAL)
    quad = swaption_price_mmg(m, q).value
    mc = swaption_price_mmg(m, q, PricingMethod.MC, McConfig(paths=200_000, seed=7))
    assert abs(quad - mc.value) < 3 * mc.stderr


def test_mixture_produces_smile(ref_curves):
    def vols(m):
        return [mmg_implied_vol(m, SwaptionQuote(5.0, 5.0, 0.2, k, settlement=Settlement.PHYSICAL)) for k in (-0.01, 0.0, 0.01)]

    # a calm scenario most of the time and a rare volatile one
    mixed = vols(MmgModel((one_factor(0.05, 0.002, 0.8), one_factor(0.05, 0.02, 0.2)), ref_curves))
    assert mixed[0] > mixed[1] and mixed[2] > mixed[1]
    # a single Gaussian scenario only skews
    single = vols(MmgModel((one_factor(0.05, 0.01),), ref_curves))
    assert single[0] > single[1] > single[2]


def test_ou_moments(ref_curves):
    a, sig, T = 0.2, 0.01, 3.0
    m = MmgModel((one_factor(a, sig),), ref_curves)
    n = 100_000
    ens = simulate_paths(m, [T], McConfig(paths=n, seed=11, antithetic=False))
    x = ens.x[:, -1, 0]
    var = sig * sig * (1 - math.exp(-2 * a * T)) / (2 * a)
    assert abs(x.mean()) < 3 * math.sqrt(var / n)
    assert abs(x.var(ddof=1) - var) < 3 * var * math.sqrt(2 / (n - 1))


def test_zero_vol_paths_are_zero(ref_curves):
    m = MmgModel((two_factor(1.0, sigma=(0.0, 0.0)),), ref_curves)
    ens = simulate_paths(m, [1.0, 2.0], McConfig(paths=64, seed=1))
    assert not np.any(ens.x) and not np.any(ens.y)


def test_determinism_across_runs_and_threads(mix):
    cfg = McConfig(paths=6000, seed=99, block_size=1024)
    a = simulate_paths(mix, [1.0, 2.5], cfg)
    b = simulate_paths(mix, [1.0, 2.5], cfg)
    c = simulate_paths(mix, [1.0, 2.5], McConfig(paths=6000, seed=99, block_size=1024, threads=3))
    for arr in ("scenario", "x", "y", "discount"):
        assert np.array_equal(getattr(a, arr), getattr(b, arr))
        assert np.array_equal(getattr(a, arr), getattr(c, arr))
    assert np.array_equal(a.x[0::2], -a.x[1::2])


def test_discount_martingale(mix, ref_curves):
    times = [1.0, 5.0, 10.0]
    ens = simulate_paths(mix, times, McConfig(paths=40_000, seed=3))
    for k, t in enumerate(times):
        mean, se = mc_mean(ens.discount[:, k], True)
        assert abs(mean - float(discount_factor(ref_curves.discount, t))) < 3 * se


def test_mc_zcb_small(mix, ref_curves):
    mean, se = mc_zcb(mix, 7.0, McConfig(paths=40_000, seed=5))
    assert abs(mean - float(discount_factor(ref_curves.discount, 7.0))) < 3 * se


def test_stderr_scales_with_paths(mix):
    se = [mc_zcb(mix, 5.0, McConfig(paths=n, seed=21, antithetic=False))[1] for n in (20_000, 40_000)]
    assert se[0] / se[1] == pytest.approx(math.sqrt(2), rel=0.2)


def test_fra_gaussian_vs_mc(mix, ref_curves):
    t, tenor = 3.0, Tenor.M6
    T = t + tenor.year_fraction
    ens = simulate_paths(mix, [t], McConfig(paths=60_000, seed=17))
    vals = np.zeros(ens.paths)
    for i, s in enumerate(mix.scenarios):
        idx = ens.scenario == i
        vals[idx] = ens.discount[idx, -1] * zcb_price(mix, i, ens.x[idx, -1, : s.q], t, np.array([T]), tenor)[:, 0]
    mean, se = mc_mean(vals, True)
    p0 = float(discount_factor(ref_curves.discount, t))
    analytic = 1 / (1 + 0.5 * fra_rate_gaussian(mix, t, T, tenor))
    assert abs(mean / p0 - analytic) < 3 * se / p0
    # shared vols and unit correlation: the forward needs no convexity
    assert fra_rate_gaussian(mix, t, T, tenor) == pytest.approx(float(modified_forward(ref_curves, tenor, t, T)), abs=1e-12)


def test_futures_convexity(mix, ref_curves):
    assert futures_convexity_adjustment(mix, 3.0, 3.25, Tenor.M3) > 0
    zero = MmgModel((two_factor(1.0, sigma=(0.0, 0.0)),), ref_curves)
    assert futures_convexity_adjustment(zero, 3.0, 3.25, Tenor.M3) == pytest.approx(0.0, abs=1e-15)


def test_cms_zero_vol_matches_deterministic(ref_curves):
    m = MmgModel((two_factor(1.0, sigma=(0.0, 0.0)),), ref_curves)
    spec = CmsSwapSpec(20, 10.0)
    det = cms_fair_spread(ref_curves, _ZeroVol(), spec)
    assert cms_spread_mmg(m, spec, PricingMethod.QUADRATURE).value == pytest.approx(det, abs=1e-12)
    mc = cms_spread_mmg(m, spec, PricingMethod.MC, McConfig(paths=64, seed=1))
    assert mc.value == pytest.approx(det, abs=1e-12)


def test_cms_quadrature_vs_mc(mix):
    spec = CmsSwapSpec(12, 5.0)
    quad = cms_spread_mmg(mix, spec, PricingMethod.QUADRATURE).value
    mc = cms_spread_mmg(mix, spec, PricingMethod.MC, McConfig(paths=20_000, seed=4))
    assert abs(quad - mc.value) < 3 * mc.stderr + 1e-7


def test_model_round_trips_to_dict(mix):
    back = MmgModel.from_dict(mix.to_dict())
    assert back.scenarios == mix.scenarios
    with pytest.raises(InputError):
        MmgModel.from_dict({"schema": "nope"})


def test_mc_config_validation():
    with pytest.raises(InputError):
        McConfig(paths=1)
    with pytest.raises(InputError):
        McConfig(paths=11)
