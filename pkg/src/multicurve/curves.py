"""Discounting and forwarding term structures.

The discount curve stores log discount factors on a monotone Hermite
interpolant. A forwarding curve of tenor D stores only a rate difference over a
reference: the simple forward implied by the discount curve over the same
accrual period (tenor 6m), or another forwarding curve (3m off 6m, 1m off 3m,
12m off 6m). The modified forward of a period is the discount-implied simple
forward plus the total spread at the period's fixing (start) time.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .errors import ConfigurationError, InputError
from .interpolation import Extrapolation, InterpCurve, hermite_curve
from .timegrid import FORWARDING_TENORS, Tenor


class CurveMode(str, enum.Enum):
    MULTI_CURVE = "MULTI_CURVE"
    SINGLE_CURVE = "SINGLE_CURVE"

    @classmethod
    def parse(cls, value) -> "CurveMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        aliases = {"SINGLE": cls.SINGLE_CURVE, "MULTI": cls.MULTI_CURVE}
        return aliases.get(key) or cls(key)


@dataclass(frozen=True)
class DiscountCurve:
    interp: InterpCurve
    snapshot_date: int = 0

    @classmethod
    def from_knots(cls, times, log_dfs, snapshot_date: int = 0) -> "DiscountCurve":
        pts = [(0.0, 0.0)] + [(float(t), float(v)) for t, v in zip(times, log_dfs) if t > 0.0]
        return cls(hermite_curve(pts, Extrapolation.LINEAR), snapshot_date)

    @classmethod
    def flat(cls, rate: float, horizon: float = 60.0) -> "DiscountCurve":
        """Flat continuously-compounded curve (log DF is linear, so exact under Hermite)."""
        return cls.from_knots([horizon], [-rate * horizon])

    @property
    def pillar_times(self) -> np.ndarray:
        return self.interp.x[1:]

    def log_df(self, T):
        return self.interp.eval(T)

    def __call__(self, T):
        return discount_factor(self, T)


def discount_factor(curve: DiscountCurve, T):
    if np.any(np.asarray(T) < 0.0):
        raise InputError("discount_factor: negative maturity")
    return np.exp(curve.interp.eval(T))


def simple_forward(curve: DiscountCurve, T0, T1, accrual=None):
    """(P(T0)/P(T1) - 1) / accrual, accrual defaulting to T1 - T0."""
    T0 = np.asarray(T0, dtype=float)
    T1 = np.asarray(T1, dtype=float)
    acc = T1 - T0 if accrual is None else np.asarray(accrual, dtype=float)
    if np.any(acc <= 0.0):
        raise InputError("simple_forward: accrual must be positive")
    ratio = np.exp(curve.interp.eval(T0) - curve.interp.eval(T1))
    out = (ratio - 1.0) / acc
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ForwardingCurve:
    """Forward curve of one tenor stored as a spread over its reference.

    ``reference`` is None when the spread is quoted against the discount curve's
    own simple forwards; otherwise the total spread is the reference's total
    spread plus this curve's interpolated difference.
    """

    tenor: Tenor
    base: DiscountCurve
    spread_interp: InterpCurve
    reference: Optional["ForwardingCurve"] = None

    def __post_init__(self):
        if self.tenor not in FORWARDING_TENORS:
            raise ConfigurationError(f"forwarding curve tenor must be one of 1m/3m/6m/12m, got {self.tenor}")

    @classmethod
    def flat(cls, tenor: Tenor, base: DiscountCurve, spread: float) -> "ForwardingCurve":
        return cls(tenor, base, hermite_curve([(0.0, spread)]))

    def spread(self, t):
        own = self.spread_interp.eval(t)
        if self.reference is None:
            return own
        return self.reference.spread(t) + own

    def forward(self, T0, T1, accrual=None):
        return simple_forward(self.base, T0, T1, accrual) + self.spread(T0)

    @property
    def reference_tenor(self) -> Tenor:
        return Tenor.D1 if self.reference is None else self.reference.tenor


@dataclass(frozen=True)
class CurveSet:
    discount: DiscountCurve
    forwarding: Mapping[Tenor, ForwardingCurve] = field(default_factory=dict)
    mode: CurveMode = CurveMode.MULTI_CURVE

    def single(self) -> "CurveSet":
        """The same curves seen in single-curve mode: every tenor projects off the discount curve."""
        if self.mode is CurveMode.SINGLE_CURVE:
            return self
        return CurveSet(self.discount, {}, CurveMode.SINGLE_CURVE)

    def in_mode(self, mode) -> "CurveSet":
        mode = CurveMode.parse(mode)
        if mode is CurveMode.SINGLE_CURVE:
            return self.single()
        return self

    def has_tenor(self, tenor: Tenor) -> bool:
        return self.mode is CurveMode.SINGLE_CURVE or tenor is Tenor.D1 or tenor in self.forwarding

    def with_curve(self, curve: ForwardingCurve) -> "CurveSet":
        fwd = dict(self.forwarding)
        fwd[curve.tenor] = curve
        return CurveSet(self.discount, fwd, self.mode)

    def spread(self, tenor: Tenor, t):
        if self.mode is CurveMode.SINGLE_CURVE or tenor is Tenor.D1:
            return np.zeros_like(np.asarray(t, dtype=float)) + 0.0
        try:
            return self.forwarding[tenor].spread(t)
        except KeyError:
            raise ConfigurationError(f"no forwarding curve for tenor {tenor.value}") from None

    def df(self, T):
        return discount_factor(self.discount, T)


def modified_forward(cs: CurveSet, tenor: Tenor, T_fixing, T_pay, accrual=None):
    """Expected fixing of ``tenor`` over [T_fixing, T_pay] under the T_pay discount measure."""
    tenor = Tenor(tenor)
    base = simple_forward(cs.discount, T_fixing, T_pay, accrual)
    if cs.mode is CurveMode.SINGLE_CURVE or tenor is Tenor.D1:
        return base
    if tenor not in cs.forwarding:
        raise ConfigurationError(f"no forwarding curve for tenor {tenor.value}")
    return base + cs.forwarding[tenor].spread(T_fixing)


def export_curves_csv(cs: CurveSet, path, horizon: float | None = None, step_days: int = 30) -> None:
    """Write (tenor, forward_start_yf, forward_rate, spread_over_1d) rows on a regular grid."""
    if horizon is None:
        horizon = float(cs.discount.pillar_times[-1]) if len(cs.discount.pillar_times) else 30.0
    starts = np.arange(0, int(round(horizon * 360)) + 1, step_days) / 360.0
    one_day = Tenor.D1.year_fraction
    f1d = simple_forward(cs.discount, starts, starts + one_day)
    rows = [("1d", s, f, 0.0) for s, f in zip(starts, f1d)]
    tenors = FORWARDING_TENORS if cs.mode is CurveMode.MULTI_CURVE else ()
    for tenor in tenors:
        if tenor not in cs.forwarding:
            continue
        fwd = modified_forward(cs, tenor, starts, starts + tenor.year_fraction)
        rows.extend((tenor.value, s, f, f - g) for s, f, g in zip(starts, fwd, f1d))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tenor", "forward_start_yf", "forward_rate", "spread_over_1d"])
        for tenor, s, f, d in rows:
            w.writerow([tenor, repr(float(s)), repr(float(f)), repr(float(d))])


def flat_curve_set(rate: float, spreads: Mapping[Tenor, float] | None = None) -> CurveSet:
    """Flat cc discount curve with constant per-tenor spreads over it (all referenced to 1d)."""
    disc = DiscountCurve.flat(rate)
    fwd = {Tenor(t): ForwardingCurve.flat(Tenor(t), disc, s) for t, s in (spreads or {}).items()}
    return CurveSet(disc, fwd)


def zero_rate(curve: DiscountCurve, T: float) -> float:
    if T <= 0:
        return -float(curve.interp.derivative(0.0))
    return -curve.log_df(T) / T


__all__ = [
    "CurveMode",
    "CurveSet",
    "DiscountCurve",
    "ForwardingCurve",
    "discount_factor",
    "export_curves_csv",
    "flat_curve_set",
    "modified_forward",
    "simple_forward",
    "zero_rate",
]
