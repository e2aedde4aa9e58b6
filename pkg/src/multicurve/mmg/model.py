"""Gaussian mixture short-rate model shared by the discount and every tenor curve.

In scenario i the factors follow dx_k = -a_k x_k dt + sigma_k(t) dW_k with
piecewise-constant sigma_k and correlated Brownian motions. Every curve adds
the same factors to its own deterministic shift, so zero-coupon bonds read

    P(t, T) = P0(T) / P0(t) * A(t, T) * exp(-sum_k B_k(t, T) x_k(t))

with the tenor curves using their pseudo-discount curve in place of P0 and the
same A and B. The shifts are never tabulated: the ratio P0(T) / P0(t) carries
them, which makes the fit to the initial curves exact by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..curves import CurveSet, discount_factor, modified_forward
from ..errors import ConfigurationError, InputError
from ..quadrature import gauss_legendre
from ..timegrid import Tenor

MMG_SCHEMA = "multicurve.mmg_model/1"


def _exp_integral(c, T, u0, u1):
    """Integral of exp(-c (T - u)) du over [u0, u1] (c > 0), broadcasting."""
    return np.exp(-c * (T - u1)) * (-np.expm1(-c * (u1 - u0))) / c


def bond_b(a, tau):
    """(1 - exp(-a tau)) / a."""
    return -np.expm1(-a * tau) / a


@dataclass(frozen=True)
class MmgScenario:
    """One mixture component: weight, mean reversions, piecewise-constant vols, correlation.

    ``sigma`` has shape (q, len(vol_times)); column j applies on
    [vol_times[j], vol_times[j + 1]) and the last column beyond.
    """

    weight: float
    a: tuple[float, ...]
    sigma: tuple[tuple[float, ...], ...]
    corr: tuple[tuple[float, ...], ...] = ()
    vol_times: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        a = np.asarray(self.a, float)
        s = np.asarray(self.sigma, float)
        q = a.size
        if q < 1:
            raise ConfigurationError("a scenario needs at least one factor")
        if not 0.0 < self.weight <= 1.0:
            raise ConfigurationError("scenario weight must lie in (0, 1]")
        if np.any(a <= 0) or not np.all(np.isfinite(a)):
            raise ConfigurationError("mean reversions must be positive")
        if s.ndim == 1:
            s = s[:, None]
            object.__setattr__(self, "sigma", tuple((float(v),) for v in s[:, 0]))
        if s.shape != (q, len(self.vol_times)):
            raise ConfigurationError("sigma must have one row per factor and one column per vol time")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise ConfigurationError("volatilities must be finite and non-negative")
        vt = np.asarray(self.vol_times, float)
        if vt[0] != 0.0 or np.any(np.diff(vt) <= 0):
            raise ConfigurationError("vol_times must start at 0 and increase")
        if not self.corr:
            object.__setattr__(self, "corr", tuple(tuple(float(i == j) for j in range(q)) for i in range(q)))
        c = np.asarray(self.corr, float)
        if c.shape != (q, q) or not np.allclose(c, c.T, atol=0, rtol=0) or not np.all(np.diag(c) == 1.0):
            raise ConfigurationError("correlation must be a symmetric matrix with unit diagonal")
        if np.linalg.eigvalsh(c).min() < -1e-12:
            raise ConfigurationError("correlation matrix is not positive semidefinite")

    @property
    def q(self) -> int:
        return len(self.a)

    @property
    def a_arr(self) -> np.ndarray:
        return np.asarray(self.a, float)

    @property
    def sigma_arr(self) -> np.ndarray:
        return np.asarray(self.sigma, float)

    @property
    def corr_arr(self) -> np.ndarray:
        return np.asarray(self.corr, float)

    def sigma_at(self, t) -> np.ndarray:
        j = np.clip(np.searchsorted(self.vol_times, t, side="right") - 1, 0, len(self.vol_times) - 1)
        return self.sigma_arr[:, j]

    def segments(self, t: float):
        """(u0, u1, sigma) pieces covering [0, t] on which every sigma_k is constant."""
        vt = np.asarray(self.vol_times, float)
        inner = vt[(vt > 0.0) & (vt < t)]
        u0 = np.concatenate([[0.0], inner])
        u1 = np.concatenate([inner, [t]])
        j = np.searchsorted(vt, u0, side="right") - 1
        return u0, u1, self.sigma_arr[:, j]

    def to_dict(self) -> dict:
        return {"weight": self.weight, "a": list(self.a), "sigma": [list(r) for r in self.sigma],
                "corr": [list(r) for r in self.corr], "vol_times": list(self.vol_times)}

    @classmethod
    def from_dict(cls, d) -> "MmgScenario":
        return cls(d["weight"], tuple(d["a"]), tuple(tuple(r) for r in d["sigma"]),
                   tuple(tuple(r) for r in d["corr"]), tuple(d["vol_times"]))


def _pair_terms(scn: MmgScenario):
    a = scn.a_arr
    return a[:, None], a[None, :], scn.corr_arr


def integrated_cov(scn: MmgScenario, t: float, T) -> np.ndarray:
    """G_kh(t, T) = int_0^t sigma_k sigma_h B_k(u, T) B_h(u, T) du, shape (..., q, q)."""
    T = np.asarray(T, float)
    ak, ah, _ = _pair_terms(scn)
    out = np.zeros(T.shape + (scn.q, scn.q))
    if t <= 0.0:
        return out
    Tb = T[..., None, None]
    u0s, u1s, sig = scn.segments(t)
    for u0, u1, s in zip(u0s, u1s, sig.T):
        ss = np.outer(s, s)
        term = (u1 - u0) - _exp_integral(ak, Tb, u0, u1) - _exp_integral(ah, Tb, u0, u1) + _exp_integral(ak + ah, Tb, u0, u1)
        out = out + ss / (ak * ah) * term
    return out


def log_a(scn: MmgScenario, t: float, T):
    """ln A(t, T) = -1/2 sum_kh rho_kh [G_kh(t, T) - G_kh(t, t)]."""
    T = np.asarray(T, float)
    rho = scn.corr_arr
    g_T = integrated_cov(scn, t, T)
    g_t = integrated_cov(scn, t, np.asarray(t, float))
    out = -0.5 * np.sum(rho * (g_T - g_t), axis=(-2, -1))
    return float(out) if out.ndim == 0 else out


def total_variance(scn: MmgScenario, t: float) -> float:
    """Variance of int_0^t sum_k x_k(u) du."""
    return float(np.sum(scn.corr_arr * integrated_cov(scn, t, np.asarray(t, float))))


def variance_rate(scn: MmgScenario, t: float) -> float:
    """Time derivative of :func:`total_variance`."""
    ak, ah, rho = _pair_terms(scn)
    total = np.zeros((scn.q, scn.q))
    if t <= 0.0:
        return 0.0
    u0s, u1s, sig = scn.segments(t)
    for u0, u1, s in zip(u0s, u1s, sig.T):
        ss = np.outer(s, s)
        ekh = _exp_integral(ak + ah, t, u0, u1)
        total = total + ss * ((_exp_integral(ak, t, u0, u1) - ekh) / ah + (_exp_integral(ah, t, u0, u1) - ekh) / ak)
    return float(np.sum(rho * total))


def state_moments(scn: MmgScenario, t: float, S: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of x(t) under the S-forward measure (risk-neutral if S is None)."""
    ak, ah, rho = _pair_terms(scn)
    q = scn.q
    cov = np.zeros((q, q))
    mean = np.zeros(q)
    if t <= 0.0:
        return mean, cov
    u0s, u1s, sig = scn.segments(t)
    a = scn.a_arr
    for u0, u1, s in zip(u0s, u1s, sig.T):
        ss = np.outer(s, s)
        ekh = _exp_integral(ak + ah, t, u0, u1)
        cov = cov + rho * ss * ekh
        if S is not None:
            # drift -sum_h rho_kh sigma_k sigma_h B_h(u, S) integrated against exp(-a_k (t - u))
            ek = _exp_integral(a[:, None], t, u0, u1)
            m = (ek - np.exp(-ah * (S - t)) * ekh) / ah
            mean = mean - np.sum(rho * ss * m, axis=1)
    return mean, cov


@dataclass(frozen=True)
class MmgModel:
    scenarios: tuple[MmgScenario, ...]
    curves: CurveSet
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.scenarios:
            raise ConfigurationError("the model needs at least one scenario")
        total = sum(s.weight for s in self.scenarios)
        if abs(total - 1.0) > 1e-12:
            raise ConfigurationError(f"scenario weights sum to {total!r}, not 1")

    @property
    def weights(self) -> np.ndarray:
        return np.array([s.weight for s in self.scenarios])

    @property
    def q_max(self) -> int:
        return max(s.q for s in self.scenarios)

    def to_dict(self) -> dict:
        from ..marketdata import curveset_to_dict

        return {"schema": MMG_SCHEMA, "scenarios": [s.to_dict() for s in self.scenarios],
                "curves": curveset_to_dict(self.curves)}

    @classmethod
    def from_dict(cls, doc) -> "MmgModel":
        from ..marketdata import curveset_from_dict

        if doc.get("schema") != MMG_SCHEMA:
            raise InputError(f"unsupported MMG schema {doc.get('schema')!r}")
        return cls(tuple(MmgScenario.from_dict(s) for s in doc["scenarios"]), curveset_from_dict(doc["curves"]))

    def with_scenarios(self, scenarios: Sequence[MmgScenario]) -> "MmgModel":
        return MmgModel(tuple(scenarios), self.curves)


def pseudo_discount(cs: CurveSet, tenor: Tenor | None, T):
    """Initial bond of the curve ``tenor`` (None or 1d: the discount curve).

    The tenor curve compounds its forwards backward from T in steps of the
    tenor and uses simple compounding at the first-period forward for the
    remaining stub, so P(T - D) / P(T) = 1 + D * F(T - D, T) for every T >= D.
    """
    T = np.asarray(T, float)
    if tenor is None or Tenor(tenor) is Tenor.D1:
        return discount_factor(cs.discount, T)
    tenor = Tenor(tenor)
    d = tenor.year_fraction
    f0 = float(modified_forward(cs, tenor, 0.0, d))

    def one(t):
        k = int(np.floor(t / d + 1e-12))
        s = max(t - k * d, 0.0)
        logp = -np.log1p(s * f0)
        if k:
            starts = s + d * np.arange(k)
            fwd = np.asarray(modified_forward(cs, tenor, starts, starts + d), float)
            logp -= float(np.sum(np.log1p(d * fwd)))
        return np.exp(logp)

    if T.ndim == 0:
        return float(one(float(T)))
    return np.array([one(float(t)) for t in T.ravel()]).reshape(T.shape)


def zcb_price(model: MmgModel, scenario: int, x, t: float, T, curve: Tenor | None = None):
    """Bond price at t in state ``x`` (shape (..., q)) for maturities T."""
    T = np.asarray(T, float)
    if np.any(T < t):
        raise InputError("zcb_price: maturity before valuation time")
    scn = model.scenarios[scenario]
    x = np.asarray(x, float)
    b = bond_b(scn.a_arr, (T - t)[..., None]) if T.ndim else bond_b(scn.a_arr, T - t)
    ratio = pseudo_discount(model.curves, curve, T) / pseudo_discount(model.curves, curve, t)
    expo = np.sum(b * x, axis=-1) if T.ndim == 0 else np.einsum("...q,tq->...t", x, b)
    out = ratio * np.exp(log_a(scn, t, T)) * np.exp(-expo)
    return float(out) if np.ndim(out) == 0 else out


def phi(model: MmgModel, scenario: int, t: float, curve: Tenor | None = None, h: float = 1e-5) -> float:
    """Deterministic shift of the short rate of ``curve`` (diagnostics only)."""
    lo = max(t - h, 0.0)
    hi = t + h
    f = -(np.log(pseudo_discount(model.curves, curve, hi)) - np.log(pseudo_discount(model.curves, curve, lo))) / (hi - lo)
    return float(f + 0.5 * variance_rate(model.scenarios[scenario], t))


def mixture_expectation(model_or_weights, evaluator: Callable[[int, MmgScenario], float]) -> float:
    """sum_i w_i E[payoff | I = i]."""
    if isinstance(model_or_weights, MmgModel):
        scns = model_or_weights.scenarios
        w = [s.weight for s in scns]
    else:
        w = list(model_or_weights)
        scns = [None] * len(w)
    if abs(sum(w) - 1.0) > 1e-12:
        raise ConfigurationError(f"mixture weights sum to {sum(w)!r}, not 1")
    return float(sum(wi * evaluator(i, s) for i, (wi, s) in enumerate(zip(w, scns))))


def theta_factor(sigma_delta, sigma, rho_delta: float, t: float, T: float, delta: float,
                 corr=None, order: int = 24, panels: int = 4) -> float:
    """Convexity factor between standard and modified forwards under deterministic vols.

    ``sigma_delta(u, v)`` and ``sigma(u, v)`` give the instantaneous forward
    volatility at time u for maturity v (scalars or factor vectors); ``corr``
    is the factor correlation matrix and ``rho_delta`` the correlation between
    the tenor and discount Brownian motions. Nested composite Gauss-Legendre.
    """
    lo, hi = t, T - delta
    if hi <= lo:
        return 1.0
    x, w = gauss_legendre(order)

    def nodes(a, b):
        edges = np.linspace(a, b, panels + 1)
        pts, wts = [], []
        for e0, e1 in zip(edges[:-1], edges[1:]):
            pts.append(0.5 * (e0 + e1) + 0.5 * (e1 - e0) * x)
            wts.append(0.5 * (e1 - e0) * w)
        return np.concatenate(pts), np.concatenate(wts)

    def vec(val):
        return np.atleast_1d(np.asarray(val, float))

    total = 0.0
    for u, wu in zip(*nodes(lo, hi)):
        vs, wv = nodes(T - delta, T)
        inner = sum(wi * vec(sigma_delta(u, v)) for v, wi in zip(vs, wv))
        ws, ww = nodes(u, T)
        theta = sum(wi * (vec(sigma_delta(u, s)) - rho_delta * vec(sigma(u, s))) for s, wi in zip(ws, ww))
        c = np.eye(inner.size) if corr is None else np.asarray(corr, float)
        total += wu * float(inner @ c @ theta)
    return float(np.exp(total))


def theta_factor_mmg(model: MmgModel, scenario: int, t: float, T: float, delta: float) -> float:
    """Theta for the model's own specification: identical vols and unit correlation."""
    scn = model.scenarios[scenario]

    def vol(u, v):
        return scn.sigma_at(u) * np.exp(-scn.a_arr * (v - u))

    return theta_factor(vol, vol, 1.0, t, T, delta, scn.corr_arr)


__all__ = [
    "MmgModel",
    "MmgScenario",
    "bond_b",
    "integrated_cov",
    "log_a",
    "mixture_expectation",
    "phi",
    "pseudo_discount",
    "state_moments",
    "theta_factor",
    "theta_factor_mmg",
    "total_variance",
    "variance_rate",
    "zcb_price",
]
