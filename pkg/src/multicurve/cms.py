"""CMS convexity by static replication, CMS swap spreads and CMS spread options.

The expectation of a swap rate S(T_a, T_c) paid at T is replicated with
swaptions through the function fbar, which approximates the ratio between the
payment bond and the swap annuity as a function of the swap rate. The spread
option integrates a Black price over the conditional law of the second rate.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .curves import CurveSet, discount_factor, modified_forward
from .errors import CalibrationWarning, InputError, NumericalError
from .quadrature import adaptive_gauss_legendre, adaptive_gauss_legendre_batch, gauss_hermite_prob
from .timegrid import DayCount, Tenor, make_schedule
from .volmodels import SabrSlice, black_core, black_put, forward_swap_rate, sabr_implied_variance, sabr_vol_kernel

log = logging.getLogger(__name__)


class CmsMode(str, enum.Enum):
    SINGLE = "SINGLE"
    MULTI = "MULTI"
    HYBRID = "HYBRID"


class SpreadVariant(str, enum.Enum):
    AS_PRINTED = "AS_PRINTED"
    MARTINGALE = "MARTINGALE"

    @classmethod
    def parse(cls, value) -> "SpreadVariant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        return {"PRINTED": cls.AS_PRINTED}.get(key) or cls(key)


class AnnuityExponent(str, enum.Enum):
    """Power on the i-th annuity term of fbar: ``i - c`` as printed, or ``i - a``."""

    PRINTED = "printed"
    STANDARD = "standard"


@dataclass(frozen=True)
class FbarSpec:
    """Inputs of fbar for the swap rate fixing at ``expiry`` and paid at ``pay_time``.

    ``accruals`` are the fixed-leg year fractions of the indexed swap.
    """

    expiry: float
    pay_time: float
    delta: float
    accruals: tuple[float, ...]
    exponent: AnnuityExponent = AnnuityExponent.PRINTED

    def powers(self) -> np.ndarray:
        m = len(self.accruals)
        j = np.arange(1, m + 1, dtype=float)
        return j - m if AnnuityExponent(self.exponent) is AnnuityExponent.PRINTED else j


def _fbar_terms(x, acc, e, delta, m):
    """fbar and two derivatives; ``acc`` and ``e`` hold periods on the last axis.

    Zero accruals pad shorter schedules and contribute nothing.
    """
    x = np.asarray(x, float)
    base_n = 1.0 + delta * x
    base_d = 1.0 + x[..., None] * acc
    if np.any(base_n <= 0) or np.any(base_d <= 0):
        raise InputError("fbar: 1 + accrual * x must be positive")
    # one power per term; the next two follow by division
    pn0 = base_n ** -m
    pn1 = pn0 / base_n
    n0 = pn0
    n1 = -m * delta * pn1
    n2 = m * (m + 1) * delta**2 * (pn1 / base_n)
    pd0 = acc * base_d ** -e
    pd1 = pd0 * acc / base_d
    d0 = np.sum(pd0, axis=-1)
    d1 = np.sum(-e * pd1, axis=-1)
    d2 = np.sum(e * (e + 1) * (pd1 * acc / base_d), axis=-1)
    f0 = n0 / d0
    q = (n1 * d0 - n0 * d1) / d0**2
    f2 = (n2 * d0 - n0 * d2) / d0**2 - 2.0 * d1 * q / d0
    return f0, q, f2


def fbar_derivatives(x, spec: FbarSpec):
    """fbar and its first two derivatives, analytically."""
    m = (spec.pay_time - spec.expiry) / spec.delta
    return _fbar_terms(x, np.asarray(spec.accruals, float), spec.powers(), spec.delta, m)


def fbar(x, spec: FbarSpec):
    f0, _, _ = fbar_derivatives(x, spec)
    return float(f0) if np.ndim(f0) == 0 else f0


def fbar_spec_for(expiry: float, pay_time: float, swap_end: float, delta: float,
                  exponent=AnnuityExponent.PRINTED) -> FbarSpec:
    """fbar inputs for the annual-fixed swap from ``expiry`` to ``swap_end``."""
    a = int(round(expiry * 360))
    c = int(round(swap_end * 360))
    sched = make_schedule(a, c, 12, DayCount.THIRTY360)
    return FbarSpec(expiry, pay_time, delta, tuple(sched.accrual_fractions), AnnuityExponent(exponent))


@dataclass(frozen=True)
class CmsExpectation:
    value: float
    forward: float
    fbar0: float
    fbar_forward: float
    integral: float
    error_estimate: float
    below_forward: bool


def _variance_fn(smile, forward: float, expiry: float) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(smile, SabrSlice):
        return lambda k: np.asarray(sabr_implied_variance(smile, forward, k, expiry))
    if callable(smile):
        return lambda k: np.broadcast_to(np.asarray(smile(k), float), np.shape(k))
    raise InputError("smile must be a SabrSlice or a callable strike -> variance")


def _batch_variance(smiles, forwards, expiries):
    """variance(items, k): Black variance of coupon ``items[j]`` at strike ``k[j]``."""
    F = np.asarray(forwards, float)
    T = np.asarray(expiries, float)
    if all(isinstance(sm, SabrSlice) for sm in smiles):
        p = np.array([sm.params() for sm in smiles], float).reshape(-1, 4)

        def sabr(i, k):
            a, b, r, e = p[i].T
            return sabr_vol_kernel(a, b, r, e, F[i], np.asarray(k, float), T[i]) ** 2 * T[i]

        return sabr
    fns = [_variance_fn(sm, f, t) for sm, f, t in zip(smiles, F, T)]

    def mixed(i, k):
        i = np.asarray(i)
        k = np.asarray(k, float)
        out = np.empty(k.shape)
        for u in np.unique(i):
            sel = i == u
            out[sel] = fns[int(u)](k[sel])
        return out

    return mixed


def replicate_expectations(forwards, specs: Sequence[FbarSpec], variance, rtol: float = 1e-8) -> list[CmsExpectation]:
    """Static-replication expectations of many swap rates in one adaptive pass.

    Uses the identity with the intrinsic part integrated in closed form, so only
    out-of-the-money puts (strikes below the forward) and calls (above) enter
    the numerical integral. ``variance(items, k)`` gives the Black variance of
    coupon ``items[j]`` at strike ``k[j]``.
    """
    S0 = np.asarray(forwards, float).reshape(-1)
    n = S0.size
    if not np.all(S0 > 0):
        raise InputError("CMS replication needs a positive forward swap rate")
    width = max(len(sp.accruals) for sp in specs)
    acc = np.zeros((n, width))
    pw = np.zeros((n, width))
    for i, sp in enumerate(specs):
        acc[i, : len(sp.accruals)] = sp.accruals
        pw[i, : len(sp.accruals)] = sp.powers()
    delta = np.array([sp.delta for sp in specs], float)
    m = np.array([(sp.pay_time - sp.expiry) / sp.delta for sp in specs], float)
    f0 = _fbar_terms(np.zeros(n), acc, pw, delta, m)[0]
    fs = _fbar_terms(S0, acc, pw, delta, m)[0]
    v_atm = np.asarray(variance(np.arange(n), S0), float)
    live = np.nonzero(v_atm > 0.0)[0]
    value = S0.copy()
    integral = np.zeros(n)
    err = np.zeros(n)
    if live.size:
        sd = np.sqrt(v_atm[live])
        s0 = S0[live]
        bps = np.stack([np.zeros(live.size), s0 * np.exp(-8.0 * sd), s0, s0 * np.exp(8.0 * sd)], axis=1)

        def integrand(j, x):
            i = live[j]
            _, d1, d2 = _fbar_terms(x, acc[i], pw[i], delta[i], m[i])
            weight = x * d2 + 2.0 * d1
            v = variance(i, x)
            s = S0[i]
            otm = np.where(x < s, black_put(s, x, v), black_core(s, x, v))
            return weight * otm

        ints, errs = adaptive_gauss_legendre_batch(integrand, bps, rtol=rtol, atol=np.abs(s0 * fs[live]) * 1e-12)
        integral[live] = ints
        err[live] = errs
        value[live] = s0 + ints / fs[live]
    out = []
    for i in range(n):
        below = bool(value[i] < S0[i])
        if below:
            log.info("CMS expectation %.6g below forward %.6g: negative replication weight", value[i], S0[i])
        out.append(CmsExpectation(float(value[i]), float(S0[i]), float(f0[i]), float(fs[i]),
                                  float(integral[i]), float(err[i]), below))
    return out


def replicate_expectation(forward: float, spec: FbarSpec, variance, rtol: float = 1e-8) -> CmsExpectation:
    """Static-replication expectation of the swap rate under the payment measure.

    ``variance`` maps strikes to Black variances.
    """
    if not float(forward) > 0:
        raise InputError("CMS replication needs a positive forward swap rate")
    return replicate_expectations([forward], [spec], lambda _, k: np.asarray(variance(np.atleast_1d(k)), float), rtol)[0]


def cms_convexity_expectation(
    cs: CurveSet,
    smile,
    T: float,
    swap: tuple[float, float],
    delta: float = 0.25,
    index_tenor: Tenor = Tenor.M6,
    exponent=AnnuityExponent.PRINTED,
    details: bool = False,
):
    """E^T[S(T_a, T_c)] for the swap rate fixing at T_a and paid at T.

    ``smile`` is a SabrSlice for the (T_a, T_c - T_a) cell or a callable giving
    the Black variance at a strike.
    """
    T_a, T_c = swap
    S0 = forward_swap_rate(cs, T_a, T_c - T_a, index_tenor)
    if T_a <= 0.0:
        res = CmsExpectation(S0, S0, np.nan, np.nan, 0.0, 0.0, False)
    else:
        spec = fbar_spec_for(T_a, T, T_c, delta, exponent)
        res = replicate_expectation(S0, spec, _variance_fn(smile, S0, T_a))
    return res if details else res.value


@dataclass(frozen=True)
class CmsSwapSpec:
    """CMS swap with ``n`` payments every ``delta`` years on the ``c``-year swap rate."""

    n: int
    c: float
    delta: float = 0.25
    float_tenor: Tenor = Tenor.M3
    index_tenor: Tenor = Tenor.M6
    id: str = ""
    quote: Optional[float] = None
    bid: Optional[float] = None
    ask: Optional[float] = None

    def __post_init__(self):
        if self.n < 1 or self.c < 1:
            raise InputError("CMS swap needs n >= 1 payments and an index tenor of at least one year")

    @property
    def maturity(self) -> float:
        return self.n * self.delta

    def pay_days(self) -> np.ndarray:
        step = int(round(self.delta * 360))
        return step * np.arange(1, self.n + 1)


@dataclass(frozen=True)
class CmsBreakdown:
    spread: float
    fixing_times: np.ndarray
    pay_times: np.ndarray
    expectations: np.ndarray
    swap_forwards: np.ndarray
    float_forwards: np.ndarray
    discounts: np.ndarray


def _mode_curves(cs: CurveSet, mode: CmsMode, single: CurveSet | None):
    single = single if single is not None else cs.single()
    if mode is CmsMode.SINGLE:
        return single, single, single
    if mode is CmsMode.MULTI:
        return cs, cs, cs
    # six-month curve for the CMS leg, proper 3m projection and OIS discounting for the rest
    return single, cs, cs


@dataclass(frozen=True)
class PreparedCms:
    """Curve-dependent pieces of a CMS swap, reusable across vol surfaces."""

    spec: CmsSwapSpec
    fix: np.ndarray
    pay: np.ndarray
    forwards: np.ndarray
    float_forwards: np.ndarray
    discounts: np.ndarray
    later: np.ndarray
    fbar_specs: tuple[FbarSpec, ...]

    @classmethod
    def build(cls, cs: CurveSet, spec: CmsSwapSpec, cms_mode=CmsMode.MULTI, single: CurveSet | None = None,
              exponent=AnnuityExponent.PRINTED) -> "PreparedCms":
        mode = CmsMode(str(cms_mode).upper()) if not isinstance(cms_mode, CmsMode) else cms_mode
        cms_curves, float_curves, disc_curves = _mode_curves(cs, mode, single)
        pay = spec.pay_days() / 360.0
        fix = pay - spec.delta
        fwds = np.array([forward_swap_rate(cms_curves, t0, spec.c, spec.index_tenor) for t0 in fix])
        later = np.nonzero(fix > 0)[0]
        fspecs = tuple(fbar_spec_for(fix[i], pay[i], fix[i] + spec.c, spec.delta, exponent) for i in later)
        flt = np.asarray(modified_forward(float_curves, spec.float_tenor, fix, pay), float)
        dfs = np.asarray(discount_factor(disc_curves.discount, pay), float)
        return cls(spec, fix, pay, fwds, flt, dfs, later, fspecs)

    def breakdown(self, surface) -> CmsBreakdown:
        exps = self.forwards.copy()
        if self.later.size:
            t = self.fix[self.later]
            smiles = [surface.slice(ti, self.spec.c) for ti in t]
            res = replicate_expectations(self.forwards[self.later], self.fbar_specs,
                                         _batch_variance(smiles, self.forwards[self.later], t))
            exps[self.later] = [r.value for r in res]
        spread = float(np.dot(exps - self.float_forwards, self.discounts) / np.sum(self.discounts))
        return CmsBreakdown(spread, self.fix, self.pay, exps, self.forwards, self.float_forwards, self.discounts)

    def spread(self, surface) -> float:
        return self.breakdown(surface).spread


def cms_breakdown(cs: CurveSet, surface, spec: CmsSwapSpec, cms_mode=CmsMode.MULTI,
                  single: CurveSet | None = None, exponent=AnnuityExponent.PRINTED) -> CmsBreakdown:
    return PreparedCms.build(cs, spec, cms_mode, single, exponent).breakdown(surface)


def cms_fair_spread(cs: CurveSet, surface, spec: CmsSwapSpec, cms_mode=CmsMode.MULTI,
                    single: CurveSet | None = None, exponent=AnnuityExponent.PRINTED) -> float:
    """Spread over the floating leg that makes the CMS swap fair.

    SINGLE uses one curve for everything; MULTI discounts on OIS, indexes the
    swap rates on 6m and pays 3m; HYBRID prices the CMS leg on the single curve
    and the floating leg on the 3m curve. ``single`` overrides the single curve
    (default: the discount curve projecting every tenor).
    """
    return cms_breakdown(cs, surface, spec, cms_mode, single, exponent).spread


@dataclass(frozen=True)
class SpreadOptionSpec:
    """Option paying at ``expiry`` the positive part of S(T_a, T_b) - S(T_a, T_c) - K.

    ``tenor_b`` and ``tenor_c`` are the swap lengths in years.
    """

    expiry: float
    tenor_b: float
    tenor_c: float
    strike: float
    price: Optional[float] = None
    rho: Optional[float] = None
    id: str = ""

    def __post_init__(self):
        if not self.expiry > 0:
            raise InputError(f"spread option {self.id}: expiry must be positive")
        if self.rho is not None and not -1.0 <= self.rho <= 1.0:
            raise InputError(f"spread option {self.id}: correlation outside [-1, 1]")


@dataclass(frozen=True)
class SpreadInputs:
    discount: float
    e_b: float
    e_c: float
    sigma_b: float
    sigma_c: float
    expiry: float
    strike: float


def spread_option_inputs(cs: CurveSet, surface, spec: SpreadOptionSpec, index_tenor: Tenor = Tenor.M6,
                         exponent=AnnuityExponent.PRINTED) -> SpreadInputs:
    """Convexity-adjusted expectations and the two volatilities read off the surface."""
    T = spec.expiry
    e_b = cms_convexity_expectation(cs, surface.slice(T, spec.tenor_b), T, (T, T + spec.tenor_b), 1.0, index_tenor, exponent)
    e_c = cms_convexity_expectation(cs, surface.slice(T, spec.tenor_c), T, (T, T + spec.tenor_c), 1.0, index_tenor, exponent)
    fwd_b = forward_swap_rate(cs, T, spec.tenor_b, index_tenor)
    fwd_c = forward_swap_rate(cs, T, spec.tenor_c, index_tenor)
    k_a = spec.strike + e_c
    # a zero lookup strike is floored so that smile formulas stay defined
    k_b = max(e_c - spec.strike, 0.0)
    sig_b = float(surface.vol(T, spec.tenor_b, max(k_a, 1e-6), fwd_b))
    sig_c = float(surface.vol(T, spec.tenor_c, max(k_b, 1e-6), fwd_c))
    return SpreadInputs(float(discount_factor(cs.discount, T)), e_b, e_c, sig_b, sig_c, T, spec.strike)


def spread_option_integral(e_b: float, e_c: float, sigma_b: float, sigma_c: float, rho: float, K: float,
                           T: float, variant=SpreadVariant.AS_PRINTED, tol: float = 1e-10,
                           max_nodes: int = 256) -> float:
    """Undiscounted E[(S_b - S_c - K)^+] by Gauss-Hermite over the second rate's driver."""
    variant = SpreadVariant.parse(variant)
    if not -1.0 <= rho <= 1.0:
        raise InputError("correlation must lie in [-1, 1]")
    sq = np.sqrt(T)
    u = sigma_b**2 * (1.0 - rho**2) * T
    drift_c = rho**2 * sigma_c**2 * T if variant is SpreadVariant.AS_PRINTED else sigma_c**2 * T

    def g(x):
        f = e_b * np.exp(-0.5 * rho**2 * sigma_b**2 * T + rho * sigma_b * sq * x)
        k = K + e_c * np.exp(-0.5 * drift_c + sigma_c * sq * x)
        return black_core(f, k, np.full_like(x, u))

    def kinked():
        dens = lambda x: g(x) * np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
        val, _ = adaptive_gauss_legendre(dens, np.linspace(-12.0, 12.0, 25), rtol=1e-12, atol=1e-16)
        return float(val)

    if u <= 1e-14:
        # no conditional variance left: the payoff is intrinsic with a kink
        return kinked()
    n = 64
    x, w = gauss_hermite_prob(n)
    prev = float(np.dot(w, g(x)))
    while n < max_nodes:
        n *= 2
        x, w = gauss_hermite_prob(n)
        cur = float(np.dot(w, g(x)))
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    # tiny conditional variance leaves a near kink that Hermite rules resolve slowly
    log.debug("spread-option Hermite rule not converged at %d nodes; switching to adaptive panels", n)
    return kinked()


def spread_option_price(cs: CurveSet, surface, spec: SpreadOptionSpec, variant=SpreadVariant.AS_PRINTED,
                        rho: float | None = None, index_tenor: Tenor = Tenor.M6,
                        exponent=AnnuityExponent.PRINTED) -> float:
    rho = spec.rho if rho is None else rho
    if rho is None:
        raise InputError(f"spread option {spec.id}: no correlation given")
    inp = spread_option_inputs(cs, surface, spec, index_tenor, exponent)
    return inp.discount * spread_option_integral(inp.e_b, inp.e_c, inp.sigma_b, inp.sigma_c, rho, inp.strike, inp.expiry, variant)


def price_from_inputs(inp: SpreadInputs, rho: float, variant=SpreadVariant.AS_PRINTED) -> float:
    return inp.discount * spread_option_integral(inp.e_b, inp.e_c, inp.sigma_b, inp.sigma_c, rho, inp.strike, inp.expiry, variant)


def calibrate_flat_correlation(
    quotes: Sequence[SpreadOptionSpec],
    cs: CurveSet | None = None,
    surface=None,
    variant=SpreadVariant.AS_PRINTED,
    inputs: Mapping[str, SpreadInputs] | None = None,
    index_tenor: Tenor = Tenor.M6,
) -> dict[float, float]:
    """One correlation per strike minimising squared price errors across expiries.

    A minimiser on the boundary of [-1, 1] is returned with a CalibrationWarning.
    ``inputs`` may carry precomputed SpreadInputs keyed by quote id.
    """
    groups: dict[float, list[SpreadInputs]] = {}
    prices: dict[float, list[float]] = {}
    for q in quotes:
        if q.price is None:
            raise InputError(f"spread option {q.id}: no price to calibrate to")
        inp = inputs[q.id] if inputs is not None and q.id in inputs else spread_option_inputs(cs, surface, q, index_tenor)
        key = round(q.strike, 12)
        groups.setdefault(key, []).append(inp)
        prices.setdefault(key, []).append(q.price)
    out: dict[float, float] = {}
    for key in sorted(groups):
        ins, px = groups[key], np.array(prices[key])

        def obj(r, ins=ins, px=px):
            model = np.array([price_from_inputs(i, r, variant) for i in ins])
            return float(np.sum((model - px) ** 2))

        res = minimize_scalar(obj, bounds=(-1.0, 1.0), method="bounded", options={"xatol": 1e-12, "maxiter": 500})
        cands = [(res.fun, float(res.x)), (obj(-1.0), -1.0), (obj(1.0), 1.0)]
        best_f, best = min(cands)
        if abs(best) >= 1.0 - 1e-9:
            warnings.warn(f"flat correlation for strike {key:g} hits the boundary {best:+.0f}", CalibrationWarning, stacklevel=2)
        out[key] = best
    return out


__all__ = [
    "AnnuityExponent",
    "CmsBreakdown",
    "CmsExpectation",
    "CmsMode",
    "CmsSwapSpec",
    "FbarSpec",
    "PreparedCms",
    "SpreadInputs",
    "SpreadOptionSpec",
    "SpreadVariant",
    "calibrate_flat_correlation",
    "cms_breakdown",
    "cms_convexity_expectation",
    "cms_fair_spread",
    "fbar",
    "fbar_derivatives",
    "fbar_spec_for",
    "price_from_inputs",
    "replicate_expectation",
    "replicate_expectations",
    "spread_option_integral",
    "spread_option_inputs",
    "spread_option_price",
]
