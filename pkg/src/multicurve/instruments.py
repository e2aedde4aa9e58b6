"""Linear instruments and their multi-curve pricing.

Every floating cash flow is projected with the modified forward of its tenor
and discounted on the discounting curve. Fixed legs pay annually with a 30/360
day count unless the instrument says otherwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import functools

import numpy as np

from .curves import CurveSet, DiscountCurve, discount_factor, modified_forward
from .errors import ConfigurationError, InputError
from .timegrid import DayCount, Schedule, Tenor, make_schedule, to_time, year_fraction


class InstrumentKind(str, enum.Enum):
    FIXING = "FIXING"
    FRA = "FRA"
    FUTURE = "FUTURE"
    OIS = "OIS"
    IRS = "IRS"
    BASIS_SWAP = "BASIS_SWAP"


class Convexity(str, enum.Enum):
    NONE = "NONE"
    GAUSSIAN = "GAUSSIAN"


@dataclass(frozen=True)
class CashFlow:
    date: int
    amount: float
    discount_factor: float


@dataclass(frozen=True)
class PricingResult:
    value: float
    fair_rate_or_spread: float
    legs: dict[str, list[CashFlow]] = field(default_factory=dict)
    details: dict[str, float] = field(default_factory=dict)


@functools.lru_cache(maxsize=4096)
def _cached_schedule(start: int, end: int, months: int, daycount: DayCount) -> Schedule:
    return make_schedule(start, end, months, daycount)


def _times(sched: Schedule):
    d = np.asarray(sched.dates, dtype=float) / 360.0
    return d[:-1], d[1:], np.asarray(sched.accrual_fractions)


def float_leg_pv(cs: CurveSet, sched: Schedule, tenor: Tenor) -> float:
    s, e, acc = _times(sched)
    fwd = modified_forward(cs, tenor, s, e, acc)
    return float(np.dot(acc * fwd, discount_factor(cs.discount, e)))


def fixed_annuity(cs: CurveSet | DiscountCurve, sched: Schedule) -> float:
    disc = cs.discount if isinstance(cs, CurveSet) else cs
    _, e, acc = _times(sched)
    return float(np.dot(acc, discount_factor(disc, e)))


def _nonzero(annuity: float, what: str) -> float:
    if annuity == 0.0 or not np.isfinite(annuity):
        raise InputError(f"{what}: zero annuity")
    return annuity


def irs_fair_rate(cs: CurveSet, float_sched: Schedule, fixed_sched: Schedule, tenor: Tenor, mode=None) -> float:
    """Fixed rate equating the fixed leg to the projected floating leg."""
    if mode is not None:
        cs = cs.in_mode(mode)
    tenor = Tenor(tenor)
    ann = _nonzero(fixed_annuity(cs, fixed_sched), "irs_fair_rate")
    return float_leg_pv(cs, float_sched, tenor) / ann


def basis_swap_fair_spread(cs: CurveSet, leg_hi: tuple[Schedule, Tenor], leg_lo: tuple[Schedule, Tenor], mode=None) -> float:
    """Spread X paid on the lower-tenor leg that makes the basis swap fair."""
    if mode is not None:
        cs = cs.in_mode(mode)
    sched_hi, tenor_hi = leg_hi
    sched_lo, tenor_lo = leg_lo
    ann = _nonzero(fixed_annuity(cs, sched_lo), "basis_swap_fair_spread")
    return (float_leg_pv(cs, sched_hi, Tenor(tenor_hi)) - float_leg_pv(cs, sched_lo, Tenor(tenor_lo))) / ann


def ois_fair_rate(discount: DiscountCurve, sched: Schedule) -> float:
    """Compounded overnight leg telescopes to P(start) - P(end) per unit notional."""
    ann = _nonzero(fixed_annuity(discount, sched), "ois_fair_rate")
    p0, p1 = discount_factor(discount, np.array([to_time(sched.start), to_time(sched.end)]))
    return float((p0 - p1) / ann)


def futures_rate_to_forward(quote: float, adjustment: float = 0.0) -> float:
    return (100.0 - quote) / 100.0 - adjustment


def fra_par_rate(cs: CurveSet, t: float, T: float, tenor: Tenor, convexity=Convexity.NONE, model=None, mode=None) -> float:
    """FRA par rate; GAUSSIAN applies the MMG convexity correction and needs ``model``."""
    if mode is not None:
        cs = cs.in_mode(mode)
    tenor = Tenor(tenor)
    if not cs.has_tenor(tenor):
        raise ConfigurationError(f"no forwarding curve for tenor {tenor.value}")
    convexity = Convexity(convexity)
    if convexity is Convexity.NONE:
        return float(modified_forward(cs, tenor, t, T))
    if model is None:
        raise ConfigurationError("GAUSSIAN FRA convexity needs a calibrated MMG model")
    from .mmg.pricing import fra_rate_gaussian

    return fra_rate_gaussian(model, t, T, tenor)


@dataclass(frozen=True)
class LinearInstrument:
    """A quoted linear instrument.

    ``tenor`` is the floating index (for BASIS_SWAP: the leg receiving the
    spread, i.e. the lower tenor) and ``tenor2`` the other basis leg. Dates are
    day serials; ``quote`` is a decimal rate or spread, or a price for FUTURE.
    """

    id: str
    kind: InstrumentKind
    start: int
    end: int
    quote: float
    tenor: Tenor = Tenor.M6
    tenor2: Optional[Tenor] = None
    fixed_frequency: int = 12
    fixed_daycount: DayCount = DayCount.THIRTY360
    float_daycount: DayCount = DayCount.ACT360
    adjustment: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.quote):
            raise InputError(f"{self.id}: quote is not finite")
        if self.end <= self.start or self.start < 0:
            raise InputError(f"{self.id}: invalid dates [{self.start}, {self.end}]")
        if self.kind is InstrumentKind.BASIS_SWAP and self.tenor2 is None:
            raise InputError(f"{self.id}: basis swap needs two tenors")

    def float_schedule(self, tenor: Tenor | None = None) -> Schedule:
        tenor = tenor or self.tenor
        if self.kind in (InstrumentKind.FIXING, InstrumentKind.FRA, InstrumentKind.FUTURE):
            return Schedule((self.start, self.end), ((self.end - self.start) / 360.0,))
        return _cached_schedule(self.start, self.end, tenor.months, self.float_daycount)

    def fixed_schedule(self) -> Schedule:
        if self.kind is InstrumentKind.OIS and self.end - self.start <= 360:
            # short OIS pay a single period
            return Schedule((self.start, self.end), (year_fraction(self.start, self.end, self.fixed_daycount),))
        return _cached_schedule(self.start, self.end, self.fixed_frequency, self.fixed_daycount)

    @property
    def tenors(self) -> tuple[Tenor, ...]:
        return (self.tenor,) if self.tenor2 is None else (self.tenor, self.tenor2)

    @property
    def market_rate(self) -> float:
        """Quote expressed as a rate (futures converted with their adjustment)."""
        if self.kind is InstrumentKind.FUTURE:
            return futures_rate_to_forward(self.quote, self.adjustment)
        return self.quote

    def last_fixing_time(self, tenor: Tenor | None = None) -> float:
        """Start of the last floating period of the leg indexed on ``tenor``."""
        if self.kind in (InstrumentKind.FIXING, InstrumentKind.FRA, InstrumentKind.FUTURE):
            return to_time(self.start)
        if self.kind is InstrumentKind.OIS:
            return to_time(self.end)
        sched = self.float_schedule(tenor or self.tenor)
        return to_time(sched.dates[-2])

    def model_rate(self, cs: CurveSet) -> float:
        """The model's value of the quantity this instrument quotes (rate units)."""
        k = self.kind
        if k in (InstrumentKind.FIXING, InstrumentKind.FRA, InstrumentKind.FUTURE):
            return float(modified_forward(cs, self.tenor, to_time(self.start), to_time(self.end),
                                          (self.end - self.start) / 360.0))
        if k is InstrumentKind.OIS:
            return ois_fair_rate(cs.discount, self.fixed_schedule())
        if k is InstrumentKind.IRS:
            return irs_fair_rate(cs, self.float_schedule(), self.fixed_schedule(), self.tenor)
        lo, hi = self.tenor, self.tenor2
        if hi.months < lo.months:
            raise InputError(f"{self.id}: spread leg must be the lower tenor")
        return basis_swap_fair_spread(cs, (self.float_schedule(hi), hi), (self.float_schedule(lo), lo))

    def residual(self, cs: CurveSet) -> float:
        return self.model_rate(cs) - self.market_rate


def _leg_flows(cs: CurveSet, sched: Schedule, rate_fn) -> list[CashFlow]:
    s, e, acc = _times(sched)
    dfs = discount_factor(cs.discount, e)
    rates = rate_fn(s, e, acc)
    return [CashFlow(int(d), float(a * r), float(p)) for d, a, r, p in zip(sched.dates[1:], acc, rates, dfs)]


def price_instrument(cs: CurveSet, inst: LinearInstrument, rate: float | None = None, mode=None) -> PricingResult:
    """Value per unit notional at ``rate`` (default: the quote).

    Swaps are valued from the side paying fixed (or paying the spread leg) and
    receiving float, so a positive value means the floating leg is worth more.
    """
    if mode is not None:
        cs = cs.in_mode(mode)
    fair = inst.model_rate(cs)
    k = inst.kind
    quote = inst.market_rate if rate is None else rate
    if k in (InstrumentKind.IRS, InstrumentKind.OIS):
        fixed = _leg_flows(cs, inst.fixed_schedule(), lambda s, e, a: np.full_like(a, quote))
        if k is InstrumentKind.IRS:
            flt = _leg_flows(cs, inst.float_schedule(), lambda s, e, a: modified_forward(cs, inst.tenor, s, e, a))
        else:
            flt = _leg_flows(cs, inst.fixed_schedule(), lambda s, e, a: modified_forward(cs, Tenor.D1, s, e, a))
        value = sum(c.amount * c.discount_factor for c in flt) - sum(c.amount * c.discount_factor for c in fixed)
        return PricingResult(value, fair, {"float": flt, "fixed": fixed})
    if k is InstrumentKind.BASIS_SWAP:
        lo, hi = inst.tenor, inst.tenor2
        hi_leg = _leg_flows(cs, inst.float_schedule(hi), lambda s, e, a: modified_forward(cs, hi, s, e, a))
        lo_leg = _leg_flows(cs, inst.float_schedule(lo), lambda s, e, a: modified_forward(cs, lo, s, e, a) + quote)
        value = sum(c.amount * c.discount_factor for c in hi_leg) - sum(c.amount * c.discount_factor for c in lo_leg)
        return PricingResult(value, fair, {"hi": hi_leg, "lo": lo_leg})
    # single-period instruments: settle (F - K) * accrual at the payment date
    acc = (inst.end - inst.start) / 360.0
    df = float(discount_factor(cs.discount, to_time(inst.end)))
    flow = CashFlow(inst.end, acc * (fair - quote), df)
    return PricingResult(flow.amount * df, fair, {"net": [flow]})


__all__ = [
    "CashFlow",
    "Convexity",
    "InstrumentKind",
    "LinearInstrument",
    "PricingResult",
    "basis_swap_fair_spread",
    "fixed_annuity",
    "float_leg_pv",
    "fra_par_rate",
    "futures_rate_to_forward",
    "irs_fair_rate",
    "ois_fair_rate",
    "price_instrument",
]
