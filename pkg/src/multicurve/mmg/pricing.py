"""Pricing under the mixture model: FRA and futures convexity, swaptions and CMS swaps.

Swaption quadrature works per scenario under the expiry-forward measure. The
factor state is Gaussian; the integration frame is rotated so its first axis
follows the swap-rate gradient at the mean, the exercise boundary is found on
that axis for every outer Gauss-Hermite node and the payoff is integrated on
the exercise side with Gauss-Legendre. Within a scenario every bond, and hence
every swap leg, is an explicit function of the state.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..cms import CmsSwapSpec
from ..curves import discount_factor, modified_forward
from ..errors import ConfigurationError, InputError, NumericalError
from ..quadrature import gauss_hermite_prob, gauss_legendre
from ..timegrid import DayCount, Tenor, make_schedule
from ..volmodels import Settlement, SwaptionQuote, annuity, black_implied_vol, forward_swap_rate
from .model import MmgModel, MmgScenario, bond_b, log_a, state_moments
from .simulation import McConfig, mc_mean, simulate_paths

DOMAIN = 9.0


class PricingMethod(str, enum.Enum):
    QUADRATURE = "QUADRATURE"
    MC = "MC"


@dataclass(frozen=True)
class MmgPrice:
    value: float
    stderr: float = 0.0
    per_scenario: tuple[float, ...] = ()
    details: dict = field(default_factory=dict, compare=False)


def fra_rate_gaussian(model: MmgModel, t: float, T: float, tenor: Tenor) -> float:
    """FRA rate settled at the fixing date: (1 / E^t[P^D(t, T)] - 1) / (T - t)."""
    acc = T - t
    if acc <= 0:
        raise InputError("fra_rate_gaussian: T must follow t")
    f0 = float(modified_forward(model.curves, Tenor(tenor), t, T))
    if t <= 0:
        return f0

    def expected_bond(scn: MmgScenario) -> float:
        mean, cov = state_moments(scn, t, t)
        b = bond_b(scn.a_arr, acc)
        return np.exp(log_a(scn, t, T) - b @ mean + 0.5 * b @ cov @ b) / (1.0 + acc * f0)

    e = sum(s.weight * expected_bond(s) for s in model.scenarios)
    return float((1.0 / e - 1.0) / acc)


def futures_rate(model: MmgModel, t: float, T: float, tenor: Tenor) -> float:
    """Risk-neutral expectation of the fixing (continuously marked futures)."""
    acc = T - t
    f0 = float(modified_forward(model.curves, Tenor(tenor), t, T))
    if t <= 0:
        return f0
    total = 0.0
    for s in model.scenarios:
        _, cov = state_moments(s, t, None)
        b = bond_b(s.a_arr, acc)
        total += s.weight * (1.0 + acc * f0) * np.exp(-log_a(s, t, T) + 0.5 * b @ cov @ b)
    return float((total - 1.0) / acc)


def futures_convexity_adjustment(model: MmgModel, t: float, T: float, tenor: Tenor) -> float:
    """Futures rate minus the forward rate of the same period."""
    return futures_rate(model, t, T, tenor) - float(modified_forward(model.curves, Tenor(tenor), t, T))


@dataclass(frozen=True)
class SwapLayout:
    """Swap from ``start`` written as weights on zero-coupon bonds maturing at ``times``.

    At ``start`` the floating leg is float_w . P and the annuity fixed_w . P; the
    floating weights fold in the tenor spreads through the period ratios of the
    pseudo-discount curve.
    """

    start: float
    times: np.ndarray
    float_w: np.ndarray
    fixed_w: np.ndarray
    p0_ratio: np.ndarray
    fixed_times: np.ndarray
    fixed_acc: np.ndarray

    @classmethod
    def build(cls, cs, start_day: int, end_day: int, float_tenor: Tenor) -> "SwapLayout":
        fixed = make_schedule(start_day, end_day, 12, DayCount.THIRTY360)
        flt = make_schedule(start_day, end_day, float_tenor.months, DayCount.ACT360)
        days = sorted(set(fixed.dates) | set(flt.dates))
        times = np.asarray(days, float) / 360.0
        pos = {d: i for i, d in enumerate(days)}
        fw = np.zeros(times.size)
        s = np.asarray(flt.dates[:-1], float) / 360.0
        e = np.asarray(flt.dates[1:], float) / 360.0
        acc = np.asarray(flt.accrual_fractions, float)
        fwd = np.asarray(modified_forward(cs, float_tenor, s, e, acc), float)
        p0 = np.asarray(discount_factor(cs.discount, times), float)
        for d0, d1, a, f in zip(flt.dates[:-1], flt.dates[1:], acc, fwd):
            fw[pos[d0]] += (1.0 + a * f) * p0[pos[d1]] / p0[pos[d0]]
            fw[pos[d1]] -= 1.0
        xw = np.zeros(times.size)
        for d, a in zip(fixed.dates[1:], fixed.accrual_fractions):
            xw[pos[d]] += a
        return cls(times[0], times, fw, xw, p0 / p0[0], np.asarray(fixed.dates[1:], float) / 360.0,
                   np.asarray(fixed.accrual_fractions, float))

    def bonds(self, scn: MmgScenario, x: np.ndarray) -> np.ndarray:
        """Bond prices at ``start`` for states x of shape (n, q) -> (n, len(times))."""
        b, a = _bond_terms(scn, self.start, tuple(self.times))
        return self.p0_ratio * a * np.exp(-x @ b.T)

    def legs(self, scn: MmgScenario, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = self.bonds(scn, x)
        return p @ self.float_w, p @ self.fixed_w

    def cash_annuity(self, S: np.ndarray) -> np.ndarray:
        base = 1.0 + self.fixed_acc[None, :] * S[:, None]
        base = np.maximum(base, 1e-12)
        return np.sum(base ** -(self.fixed_times - self.start)[None, :], axis=1)


@functools.lru_cache(maxsize=4096)
def _bond_terms(scn: MmgScenario, start: float, times: tuple) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(times)
    return bond_b(scn.a_arr[None, :], (t - start)[:, None]), np.exp(log_a(scn, start, t))


def _payoff(layout: SwapLayout, scn: MmgScenario, x: np.ndarray, K: float, payer: bool, settlement: Settlement):
    flt, ann = layout.legs(scn, x)
    S = flt / ann
    sign = 1.0 if payer else -1.0
    if settlement is Settlement.PHYSICAL:
        return np.maximum(sign * (flt - K * ann), 0.0)
    return layout.cash_annuity(S) * np.maximum(sign * (S - K), 0.0)


def _rotation(h: np.ndarray) -> np.ndarray:
    """Orthonormal matrix whose first column is h / |h|."""
    q = h.size
    n = np.linalg.norm(h)
    if n == 0:
        return np.eye(q)
    qm, _ = np.linalg.qr(np.column_stack([h / n, np.eye(q)]))
    if qm[:, 0] @ h < 0:
        qm[:, 0] = -qm[:, 0]
    return qm


@functools.lru_cache(maxsize=4096)
def _forward_moments(scn: MmgScenario, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Mean and a square root of the covariance of x(t) under the t-forward measure."""
    mean, cov = state_moments(scn, t, t)
    w, v = np.linalg.eigh(cov)
    return mean, v * np.sqrt(np.clip(w, 0.0, None))


@functools.lru_cache(maxsize=None)
def _outer_rule(dims: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    if dims == 0:
        return np.zeros((1, 0)), np.ones(1)
    z, w = gauss_hermite_prob(n)
    grids = np.meshgrid(*([z] * dims), indexing="ij")
    wgrids = np.meshgrid(*([w] * dims), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1), np.prod(np.stack([g.ravel() for g in wgrids]), axis=0)


def _scenario_swaption(layout, scn, K, payer, settlement, n_inner, n_outer) -> float:
    """E^{T_a}[payoff] for one scenario by rotated boundary-split quadrature."""
    T_a = layout.start
    mean, L = _forward_moments(scn, T_a)
    q = scn.q
    b_mat, a_coef = _bond_terms(scn, T_a, tuple(layout.times))
    coef = layout.p0_ratio * a_coef
    p = coef * np.exp(-b_mat @ mean)
    f0, a0 = p @ layout.float_w, p @ layout.fixed_w
    dp = -p[:, None] * b_mat
    grads = (dp.T @ layout.float_w * a0 - f0 * (dp.T @ layout.fixed_w)) / (a0 * a0)
    h = L.T @ grads
    if np.linalg.norm(h) == 0.0:
        return float(_payoff(layout, scn, mean[None, :], K, payer, settlement)[0])
    R = L @ _rotation(h)
    outer, wout = _outer_rule(q - 1, n_outer)
    base = mean[None, :] + outer @ R[:, 1:].T
    d = R[:, 0]
    bd = b_mat @ d
    base_expo = base @ b_mat.T

    def rate(r):
        p = coef * np.exp(-base_expo - r[:, None] * bd[None, :])
        f, a = p @ layout.float_w, p @ layout.fixed_w
        dp = -p * bd[None, :]
        df, da = dp @ layout.float_w, dp @ layout.fixed_w
        return f / a - K, (df * a - f * da) / (a * a)

    lo = np.full(len(base), -DOMAIN)
    hi = np.full(len(base), DOMAIN)
    g_lo = rate(lo)[0]
    g_hi = rate(hi)[0]
    # the rate rises along d; clamp the boundary where it never crosses the strike
    root = np.where(g_lo >= 0, -DOMAIN, DOMAIN)
    live = (g_lo < 0) & (g_hi > 0)
    if np.any(live):
        idx = np.nonzero(live)[0]
        a, b = lo[idx], hi[idx]
        r = np.zeros(idx.size)
        expo_all = base_expo
        base_expo = expo_all[idx]
        for _ in range(100):
            g, dg = rate(r)
            a = np.where(g < 0, r, a)
            b = np.where(g < 0, b, r)
            step = r - g / dg
            bad = ~np.isfinite(step) | (step < a) | (step > b)
            new = np.where(bad, 0.5 * (a + b), step)
            done = np.max(np.abs(new - r)) < 1e-13
            r = new
            if done:
                break
        else:
            raise NumericalError("swaption quadrature: exercise boundary search did not converge")
        base_expo = expo_all
        root[idx] = r
    xg, wg = gauss_legendre(n_inner)
    start = root if payer else np.full_like(root, -DOMAIN)
    stop = np.full_like(root, DOMAIN) if payer else root
    half = 0.5 * (stop - start)
    r = 0.5 * (start + stop)[:, None] + half[:, None] * xg[None, :]
    states = base[:, None, :] + r[..., None] * d[None, None, :]
    pay = _payoff(layout, scn, states.reshape(-1, q), K, payer, settlement).reshape(r.shape)
    dens = np.exp(-0.5 * r * r) / np.sqrt(2.0 * np.pi)
    inner = half * np.sum(pay * dens * wg[None, :], axis=1)
    return float(wout @ inner)


@dataclass(frozen=True)
class PreparedSwaption:
    """Model-independent pieces of a swaption: bond layout, forward, strike, expiry discount."""

    layout: SwapLayout
    forward: float
    strike: float
    payer: bool
    settlement: Settlement
    discount: float

    @classmethod
    def build(cls, cs, quote: SwaptionQuote) -> "PreparedSwaption":
        layout = SwapLayout.build(cs, quote.start_day, quote.end_day, quote.float_tenor)
        S0 = forward_swap_rate(cs, quote.expiry, quote.tenor, quote.float_tenor)
        return cls(layout, S0, quote.strike_for(S0), quote.payer, Settlement(quote.settlement),
                   float(discount_factor(cs.discount, quote.expiry)))


def price_prepared(scenarios, prep: PreparedSwaption, n_inner: int = 48, n_outer: int = 24) -> tuple[float, tuple[float, ...]]:
    """Mixture value and per-scenario values of a prepared swaption by quadrature."""
    if max(s.q for s in scenarios) > 2:
        raise ConfigurationError("swaption quadrature supports at most two factors per scenario")
    per = tuple(prep.discount * _scenario_swaption(prep.layout, s, prep.strike, prep.payer, prep.settlement,
                                                   n_inner, n_outer) for s in scenarios)
    return float(sum(s.weight * v for s, v in zip(scenarios, per))), per


def swaption_price_mmg(model: MmgModel, quote: SwaptionQuote, method=PricingMethod.QUADRATURE,
                       config: Optional[McConfig] = None, n_inner: int = 48, n_outer: int = 24) -> MmgPrice:
    """Swaption value under the mixture (settlement and strike taken from ``quote``)."""
    method = PricingMethod(str(getattr(method, "value", method)).upper())
    prep = PreparedSwaption.build(model.curves, quote)
    details = {"forward": prep.forward, "strike": prep.strike, "discount": prep.discount}
    if method is PricingMethod.QUADRATURE:
        value, per = price_prepared(model.scenarios, prep, n_inner, n_outer)
        return MmgPrice(value, 0.0, per, details)
    config = config or McConfig()
    ens = simulate_paths(model, [quote.expiry], config)
    vals = np.zeros(ens.paths)
    for i, s in enumerate(model.scenarios):
        idx = ens.scenario == i
        if np.any(idx):
            vals[idx] = ens.discount[idx, -1] * _payoff(prep.layout, s, ens.x[idx, -1, : s.q], prep.strike,
                                                        prep.payer, prep.settlement)
    value, se = mc_mean(vals, ens.antithetic)
    return MmgPrice(value, se, (), details)


def mmg_implied_vol(model: MmgModel, quote: SwaptionQuote, price: Optional[float] = None) -> float:
    """Black volatility reproducing the model price under the quote's annuity convention."""
    prep = PreparedSwaption.build(model.curves, quote)
    if price is None:
        price = price_prepared(model.scenarios, prep)[0]
    ann = annuity(model.curves, quote.expiry, quote.fixed_schedule(), prep.forward, quote.settlement)
    return black_implied_vol(price / (prep.discount * ann), prep.forward, prep.strike, quote.expiry, call=quote.payer)


def _cms_coupon_expectation(model, layout: SwapLayout, pay: float, n_nodes: int) -> float:
    """E^{pay}[S(T_fix)] by tensor Gauss-Hermite under the fixing-forward measure."""
    t = layout.start
    p0 = discount_factor(model.curves.discount, np.array([t, pay]))
    total = 0.0
    for s in model.scenarios:
        mean, cov = state_moments(s, t, t)
        w, v = np.linalg.eigh(cov)
        L = v * np.sqrt(np.clip(w, 0.0, None))
        z, wz = gauss_hermite_prob(n_nodes)
        grids = np.meshgrid(*([z] * s.q), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        wts = np.prod(np.stack(np.meshgrid(*([wz] * s.q), indexing="ij"), axis=0).reshape(s.q, -1), axis=0)
        x = mean[None, :] + pts @ L.T
        flt, ann = layout.legs(s, x)
        b = bond_b(s.a_arr, pay - t)
        bond = np.exp(log_a(s, t, pay) - x @ b) * p0[1] / p0[0]
        total += s.weight * float(wts @ (bond * flt / ann))
    return total * p0[0] / p0[1]


def cms_spread_mmg(model: MmgModel, spec: CmsSwapSpec, method=PricingMethod.MC,
                   config: Optional[McConfig] = None, n_nodes: int = 16) -> MmgPrice:
    """Fair spread of a CMS swap (CMS leg against the floating leg) under the mixture."""
    method = PricingMethod(str(getattr(method, "value", method)).upper())
    cs = model.curves
    pay = spec.pay_days() / 360.0
    fix = pay - spec.delta
    fix_days = spec.pay_days() - int(round(spec.delta * 360))
    c_days = int(round(spec.c * 360))
    layouts = [SwapLayout.build(cs, int(d), int(d) + c_days, spec.index_tenor) for d in fix_days]
    dfs = np.asarray(discount_factor(cs.discount, pay), float)
    flt = np.asarray(modified_forward(cs, spec.float_tenor, fix, pay), float)
    norm = float(np.sum(dfs))
    if method is PricingMethod.QUADRATURE:
        exps = []
        for lay, T in zip(layouts, pay):
            if lay.start <= 0:
                f, a = lay.legs(model.scenarios[0], np.zeros((1, model.scenarios[0].q)))
                exps.append(float(f[0] / a[0]))
            else:
                exps.append(_cms_coupon_expectation(model, lay, T, n_nodes))
        exps = np.array(exps)
        spread = float(np.dot(exps - flt, dfs) / norm)
        return MmgPrice(spread, 0.0, (), {"expectations": exps, "float_forwards": flt})
    config = config or McConfig()
    sim_times = fix[fix > 0]
    ens = simulate_paths(model, sim_times, config)
    leg = np.zeros(ens.paths)
    for lay, T in zip(layouts, pay):
        t = lay.start
        if t <= 0:
            f, a = lay.legs(model.scenarios[0], np.zeros((1, model.scenarios[0].q)))
            leg += float(f[0] / a[0]) * discount_factor(cs.discount, T)
            continue
        k = int(np.searchsorted(ens.times, t))
        for i, s in enumerate(model.scenarios):
            idx = ens.scenario == i
            if not np.any(idx):
                continue
            x = ens.x[idx, k, : s.q]
            f, a = lay.legs(s, x)
            b = bond_b(s.a_arr, T - t)
            ratio = float(discount_factor(cs.discount, T) / discount_factor(cs.discount, t))
            bond = ratio * np.exp(log_a(s, t, T) - x @ b)
            leg[idx] += ens.discount[idx, k] * bond * f / a
    vals = (leg - float(np.dot(flt, dfs))) / norm
    value, se = mc_mean(vals, ens.antithetic)
    return MmgPrice(value, se, (), {"paths": ens.paths})


__all__ = [
    "MmgPrice",
    "PricingMethod",
    "SwapLayout",
    "PreparedSwaption",
    "cms_spread_mmg",
    "fra_rate_gaussian",
    "futures_convexity_adjustment",
    "futures_rate",
    "mmg_implied_vol",
    "price_prepared",
    "swaption_price_mmg",
]
