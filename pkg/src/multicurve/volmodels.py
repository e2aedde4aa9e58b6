"""Black swaption pricing and the SABR implied-volatility approximation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .curves import CurveMode, CurveSet, discount_factor
from .errors import ConfigurationError, InputError, NumericalError
from .instruments import PricingResult, irs_fair_rate
from .timegrid import DayCount, Schedule, Tenor, make_schedule

# below this |z| the ratio z/x(z) is taken from its Taylor series
SABR_SERIES_THRESHOLD = 1e-4


class Settlement(str, enum.Enum):
    CASH = "CASH"
    PHYSICAL = "PHYSICAL"


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def black_core(S, K, v):
    """S Phi(d1) - K Phi(d2); intrinsic at v = 0 and S - K for K <= 0."""
    S, K, v = np.broadcast_arrays(np.asarray(S, float), np.asarray(K, float), np.asarray(v, float))
    if np.any(v < 0):
        raise InputError("black_core: negative variance")
    out = np.maximum(S - K, 0.0)
    out = np.where(K <= 0, S - K, out)
    live = (v > 0) & (K > 0) & (S > 0)
    if np.any(live):
        s, k, sv = S[live], K[live], np.sqrt(v[live])
        d1 = np.log(s / k) / sv + 0.5 * sv
        out = np.array(out, float)
        out[live] = s * ndtr(d1) - k * ndtr(d1 - sv)
    return _out(out)


def black_put(S, K, v):
    """K Phi(-d2) - S Phi(-d1), the receiver counterpart of :func:`black_core`."""
    S, K, v = np.broadcast_arrays(np.asarray(S, float), np.asarray(K, float), np.asarray(v, float))
    if np.any(v < 0):
        raise InputError("black_put: negative variance")
    out = np.maximum(K - S, 0.0)
    live = (v > 0) & (K > 0) & (S > 0)
    if np.any(live):
        s, k, sv = S[live], K[live], np.sqrt(v[live])
        d1 = np.log(s / k) / sv + 0.5 * sv
        out = np.array(out, float)
        out[live] = k * ndtr(sv - d1) - s * ndtr(-d1)
    return _out(out)


def black_implied_vol(price: float, S: float, K: float, T: float, call: bool = True) -> float:
    """Invert the Black core for the lognormal volatility."""
    intrinsic = max(S - K, 0.0) if call else max(K - S, 0.0)
    upper = S if call else K
    if not (intrinsic - 1e-15 <= price < upper):
        raise InputError(f"price {price:.6g} outside the Black no-arbitrage range")
    if price <= intrinsic:
        return 0.0
    fn = black_core if call else black_put

    def f(sig):
        return fn(S, K, sig * sig * T) - price

    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e3:
            raise NumericalError("implied volatility not bracketed")
    return brentq(f, 1e-12, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=300)


def cash_annuity(expiry: float, pay_times, accruals, S: float) -> float:
    """Sum over fixed periods of (1 / (1 + accrual * S)) ** (T_i - T_a)."""
    pay_times = np.asarray(pay_times, float)
    acc = np.asarray(accruals, float)
    base = 1.0 + acc * S
    if np.any(base <= 0):
        raise InputError("cash annuity: 1 + accrual * S must be positive")
    return float(np.sum(base ** -(pay_times - expiry)))


def physical_annuity(cs: CurveSet, expiry: float, pay_times, accruals) -> float:
    """(1 / P(T_a)) * sum accrual * P(T_i)."""
    pay_times = np.asarray(pay_times, float)
    p = discount_factor(cs.discount, pay_times)
    return float(np.dot(np.asarray(accruals, float), p) / discount_factor(cs.discount, expiry))


def annuity(cs: CurveSet, expiry: float, schedule: Schedule, S: float, settlement=Settlement.CASH) -> float:
    settlement = Settlement(settlement)
    times = np.asarray(schedule.dates[1:], float) / 360.0
    if settlement is Settlement.CASH:
        return cash_annuity(expiry, times, schedule.accrual_fractions, S)
    return physical_annuity(cs, expiry, times, schedule.accrual_fractions)


@dataclass(frozen=True)
class SwaptionQuote:
    """European swaption on a forward-start swap from ``expiry`` to ``expiry + tenor``.

    ``strike`` is absolute when given; otherwise the strike is the forward swap
    rate plus ``strike_offset``. ``vol`` is a lognormal Black volatility.
    """

    expiry: float
    tenor: float
    vol: float
    strike_offset: float = 0.0
    strike: Optional[float] = None
    settlement: Settlement = Settlement.CASH
    payer: bool = True
    float_tenor: Tenor = Tenor.M6
    id: str = ""
    price: Optional[float] = None

    def __post_init__(self):
        if not self.expiry > 0:
            raise InputError(f"swaption {self.id}: expiry must be positive")
        if not self.tenor > 0:
            raise InputError(f"swaption {self.id}: tenor must be positive")
        if not (np.isfinite(self.vol) and self.vol >= 0):
            raise InputError(f"swaption {self.id}: volatility must be finite and non-negative")

    @property
    def start_day(self) -> int:
        return int(round(self.expiry * 360))

    @property
    def end_day(self) -> int:
        return self.start_day + int(round(self.tenor * 360))

    def fixed_schedule(self) -> Schedule:
        return make_schedule(self.start_day, self.end_day, 12, DayCount.THIRTY360)

    def float_schedule(self) -> Schedule:
        return make_schedule(self.start_day, self.end_day, self.float_tenor.months, DayCount.ACT360)

    def strike_for(self, forward: float) -> float:
        return self.strike if self.strike is not None else forward + self.strike_offset


def forward_swap_rate(cs: CurveSet, expiry: float, tenor: float, float_tenor: Tenor = Tenor.M6) -> float:
    """Fair rate of the annual-fixed swap starting at ``expiry`` and lasting ``tenor`` years."""
    a = int(round(expiry * 360))
    b = a + int(round(tenor * 360))
    fixed = make_schedule(a, b, 12, DayCount.THIRTY360)
    flt = make_schedule(a, b, float_tenor.months, DayCount.ACT360)
    return irs_fair_rate(cs, flt, fixed, float_tenor)


def _pricing_curves(cs: CurveSet, mode, single: CurveSet | None) -> CurveSet:
    mode = CurveMode.parse(mode)
    if mode is CurveMode.SINGLE_CURVE:
        return single if single is not None else cs.single()
    return cs


def swaption_price(cs: CurveSet, quote: SwaptionQuote, mode=CurveMode.MULTI_CURVE, single: CurveSet | None = None) -> PricingResult:
    """P(T_a) * C(T_a, T_b) * Bl(S, K, sigma^2 T_a) with S from the chosen curve mode.

    ``single`` optionally supplies the curve set used in SINGLE_CURVE mode; by
    default the discount curve projects every tenor.
    """
    curves = _pricing_curves(cs, mode, single)
    fixed = quote.fixed_schedule()
    S = irs_fair_rate(curves, quote.float_schedule(), fixed, quote.float_tenor)
    K = quote.strike_for(S)
    v = quote.vol ** 2 * quote.expiry
    ann = annuity(curves, quote.expiry, fixed, S, quote.settlement)
    p_a = float(discount_factor(curves.discount, quote.expiry))
    core = black_core(S, K, v) if quote.payer else black_put(S, K, v)
    value = p_a * ann * core
    return PricingResult(value, S, details={"forward": S, "strike": K, "annuity": ann, "discount": p_a, "variance": v})


@dataclass(frozen=True)
class SabrSlice:
    alpha: float
    beta: float
    rho: float
    epsilon: float
    expiry: Optional[float] = None
    tenor: Optional[float] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise InputError("SABR alpha must be positive")
        if not 0.0 <= self.beta <= 1.0:
            raise InputError("SABR beta must lie in [0, 1]")
        if not -1.0 < self.rho < 1.0:
            raise InputError("SABR rho must lie strictly inside (-1, 1)")
        if not self.epsilon >= 0:
            raise InputError("SABR epsilon must be non-negative")

    def params(self) -> tuple[float, float, float, float]:
        return self.alpha, self.beta, self.rho, self.epsilon


def _z_over_x(z, rho):
    z = np.asarray(z, float)
    rho = np.broadcast_to(np.asarray(rho, float), z.shape)
    out = np.empty_like(z)
    small = np.abs(z) < SABR_SERIES_THRESHOLD
    zs, rs = z[small], rho[small]
    out[small] = 1.0 - 0.5 * rs * zs + (2.0 - 3.0 * rs**2) / 12.0 * zs**2 + (5.0 * rs / 24.0 - rs**3 / 4.0) * zs**3
    zl, rl = z[~small], rho[~small]
    x = np.log((np.sqrt(1.0 - 2.0 * rl * zl + zl * zl) + zl - rl) / (1.0 - rl))
    out[~small] = zl / x
    return out


def sabr_vol_kernel(alpha, beta, rho, eps, S, K, T):
    """Hagan lognormal vol for broadcast parameter arrays; inputs are assumed valid."""
    omb = 1.0 - beta
    lsk = np.log(S / K)
    sk = (S * K) ** (0.5 * omb)
    den = sk * (1.0 + omb**2 / 24.0 * lsk**2 + omb**4 / 1920.0 * lsk**4)
    z = eps / alpha * sk * lsk
    corr = 1.0 + (omb**2 * alpha**2 / (24.0 * sk**2) + rho * beta * eps * alpha / (4.0 * sk) + eps**2 * (2.0 - 3.0 * rho**2) / 24.0) * T
    return alpha / den * _z_over_x(z, rho) * corr


def sabr_implied_vol(slice_: SabrSlice, S, K, T):
    """Hagan et al. lognormal implied volatility for forward S and strike K."""
    alpha, beta, rho, eps = slice_.params()
    if abs(rho) >= 1.0:
        raise InputError("SABR rho must lie strictly inside (-1, 1)")
    S = np.asarray(S, float)
    K = np.asarray(K, float)
    if np.any(S <= 0) or np.any(K <= 0):
        raise InputError("SABR needs positive forward and strike")
    if np.any(np.asarray(T) < 0):
        raise InputError("SABR needs a non-negative expiry")
    return _out(sabr_vol_kernel(alpha, beta, rho, eps, S, K, T))


def sabr_implied_variance(slice_: SabrSlice, S, K, T):
    return _out(np.asarray(sabr_implied_vol(slice_, S, K, T)) ** 2 * T)


@dataclass(frozen=True)
class SabrSurface:
    """SABR slices keyed by (expiry, tenor) in years.

    Parameters are interpolated linearly in expiry within a tenor and held flat
    outside the quoted expiries; tenors must match a calibrated one.
    """

    slices: Mapping[tuple[float, float], SabrSlice] = field(default_factory=dict)

    @property
    def tenors(self) -> list[float]:
        return sorted({t for _, t in self.slices})

    def expiries(self, tenor: float) -> list[float]:
        return sorted(e for e, t in self.slices if math.isclose(t, tenor))

    def slice(self, expiry: float, tenor: float) -> SabrSlice:
        ten = [t for t in self.tenors if math.isclose(t, tenor, abs_tol=1e-9)]
        if not ten:
            raise ConfigurationError(f"no SABR slices for swap tenor {tenor:g}y")
        tenor = ten[0]
        exps = self.expiries(tenor)
        if expiry <= exps[0]:
            return self.slices[(exps[0], tenor)]
        if expiry >= exps[-1]:
            return self.slices[(exps[-1], tenor)]
        j = int(np.searchsorted(exps, expiry))
        e0, e1 = exps[j - 1], exps[j]
        w = (expiry - e0) / (e1 - e0)
        p0 = np.array(self.slices[(e0, tenor)].params())
        p1 = np.array(self.slices[(e1, tenor)].params())
        a, b, r, e = (1 - w) * p0 + w * p1
        return SabrSlice(float(a), float(b), float(r), float(e), expiry, tenor)

    def vol(self, expiry: float, tenor: float, strike, forward: float):
        return sabr_implied_vol(self.slice(expiry, tenor), forward, strike, expiry)

    def variance(self, expiry: float, tenor: float, strike, forward: float):
        return sabr_implied_variance(self.slice(expiry, tenor), forward, strike, expiry)


@dataclass(frozen=True)
class VolGrid:
    """Quoted smiles keyed by (expiry, tenor): strikes and lognormal vols.

    Vols are linear in strike between quotes and flat beyond the wings; in
    expiry the nearest quoted smile of the same tenor is used.
    """

    smiles: Mapping[tuple[float, float], tuple[tuple[float, ...], tuple[float, ...]]]

    def vol(self, expiry: float, tenor: float, strike, forward: float | None = None):
        keys = [k for k in self.smiles if math.isclose(k[1], tenor, abs_tol=1e-9)]
        if not keys:
            raise ConfigurationError(f"no quoted smile for swap tenor {tenor:g}y")
        key = min(keys, key=lambda k: (abs(k[0] - expiry), k[0]))
        strikes, vols = self.smiles[key]
        return _out(np.interp(strike, strikes, vols))

    def variance(self, expiry: float, tenor: float, strike, forward: float | None = None):
        return _out(np.asarray(self.vol(expiry, tenor, strike, forward)) ** 2 * expiry)


__all__ = [
    "SabrSlice",
    "SabrSurface",
    "Settlement",
    "SwaptionQuote",
    "VolGrid",
    "annuity",
    "black_core",
    "black_implied_vol",
    "black_put",
    "cash_annuity",
    "forward_swap_rate",
    "physical_annuity",
    "sabr_implied_variance",
    "sabr_implied_vol",
    "swaption_price",
]
