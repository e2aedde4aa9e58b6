"""Sequential curve bootstrap.

The discount curve is solved first from the overnight fixing and the OIS
strip. Forwarding curves follow in dependency order (6m over the discount
forwards, 3m over 6m, 1m over 3m, 12m over 6m); each unknown is the
interpolated rate difference at a pillar's last fixing date. Because the
Hermite slopes at a knot depend on its neighbours, a forward pass is followed
by Gauss-Seidel sweeps until no knot moves by more than ``knot_tolerance``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .curves import CurveMode, CurveSet, DiscountCurve, ForwardingCurve, modified_forward, simple_forward
from .errors import BootstrapError, InputError
from .instruments import InstrumentKind, LinearInstrument
from .interpolation import Extrapolation, hermite_curve
from .timegrid import Tenor, to_time

log = logging.getLogger(__name__)

DEFAULT_ORDERING = ((Tenor.M6, Tenor.D1), (Tenor.M3, Tenor.M6), (Tenor.M1, Tenor.M3), (Tenor.M12, Tenor.M6))


@dataclass(frozen=True)
class BootstrapSpec:
    ordering: tuple[tuple[Tenor, Tenor], ...] = DEFAULT_ORDERING
    tolerance: float = 1e-8
    knot_tolerance: float = 1e-12
    max_sweeps: int = 50
    spread_bracket: tuple[float, float] = (-0.05, 0.10)
    rate_bracket: tuple[float, float] = (-0.05, 0.10)
    max_abs_value: float = 2.0


@dataclass
class BootstrapReport:
    residuals: list[tuple[str, float]] = field(default_factory=list)
    knots: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    sweeps: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max((r for _, r in self.residuals), default=0.0)

    def to_dict(self) -> dict:
        return {
            "residuals": [[i, r] for i, r in self.residuals],
            "knots": {k: [[t, v] for t, v in pts] for k, pts in self.knots.items()},
            "sweeps": dict(self.sweeps),
            "warnings": list(self.warnings),
            "max_residual": self.max_residual,
        }


def _root(f: Callable[[float], float], lo: float, hi: float, limit: float, pillar: str) -> float:
    """Brent on [lo, hi], widening the bracket geometrically until a sign change."""
    flo, fhi = f(lo), f(hi)
    width = hi - lo
    while np.sign(flo) == np.sign(fhi) and flo != 0.0:
        width *= 2.0
        mid = 0.5 * (lo + hi)
        lo, hi = mid - width, mid + width
        if width > 2 * limit:
            raise BootstrapError("root not bracketed after expansion", pillar)
        flo, fhi = f(lo), f(hi)
        if not (np.isfinite(flo) and np.isfinite(fhi)):
            raise BootstrapError("repricing function is not finite inside the bracket", pillar)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    return brentq(f, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)


def _solve_knots(
    ids: Sequence[str],
    times: Sequence[float],
    residual: Callable[[int, list[float], list[float]], float],
    bracket: tuple[float, float],
    spec: BootstrapSpec,
    scale: Sequence[float] | None = None,
) -> tuple[list[float], int]:
    """Solve one unknown per knot; ``residual(k, times, values)`` reprices pillar k.

    ``scale[k]`` maps the bracket (expressed in rate units) onto the knot
    variable, e.g. a maturity for log discount factors.
    """
    n = len(times)
    scale = [1.0] * n if scale is None else list(scale)
    values: list[float] = []
    times = list(times)
    for k in range(n):
        ts = times[: k + 1]

        def f(v, k=k, ts=ts):
            return residual(k, ts, values + [v])

        lo, hi = bracket
        if values:
            center = values[-1] / scale[k - 1] if scale[k - 1] else 0.0
            lo, hi = min(lo, center - 0.01), max(hi, center + 0.01)
        v = _root(lambda z: f(z * scale[k]), lo, hi, spec.max_abs_value, ids[k]) * scale[k]
        values.append(v)
    sweeps = 0
    if n > 1:
        while True:
            sweeps += 1
            move = 0.0
            for k in range(n):
                def g(v, k=k):
                    trial = values.copy()
                    trial[k] = v
                    return residual(k, times, trial)

                c = values[k] / scale[k]
                new = _root(lambda z: g(z * scale[k]), c - 1e-4, c + 1e-4, spec.max_abs_value, ids[k]) * scale[k]
                move = max(move, abs(new - values[k]))
                values[k] = new
            if move < spec.knot_tolerance:
                break
            if sweeps >= spec.max_sweeps:
                raise BootstrapError(f"knot sweeps did not converge (last move {move:.3e})", ids[-1])
    return values, sweeps


def _check_increasing(ids, times, what):
    for (i0, t0), (i1, t1) in zip(zip(ids, times), zip(ids[1:], times[1:])):
        if t1 <= t0:
            raise InputError(f"{what}: pillars {i0} and {i1} share or reverse knot date {t1:.6f}")


def bootstrap_discount(instruments: Sequence[LinearInstrument], spec: BootstrapSpec = BootstrapSpec()) -> tuple[DiscountCurve, BootstrapReport]:
    """Log-discount-factor knots at each OIS (and overnight fixing) maturity."""
    pillars = [
        q for q in instruments
        if q.kind is InstrumentKind.OIS or (q.kind is InstrumentKind.FIXING and q.tenor is Tenor.D1)
    ]
    if not pillars:
        raise InputError("discount bootstrap needs an overnight fixing or at least one OIS quote")
    pillars.sort(key=lambda q: (q.end, q.id))
    ids = [q.id for q in pillars]
    times = [to_time(q.end) for q in pillars]
    _check_increasing(ids, times, "discount curve")

    def build(ts, vs):
        return DiscountCurve.from_knots(ts, vs)

    def residual(k, ts, vs):
        return pillars[k].residual(CurveSet(build(ts, vs), {}, CurveMode.SINGLE_CURVE))

    # knot variable is log P(T) = -z T, bracket in zero-rate units
    values, sweeps = _solve_knots(ids, times, residual, spec.rate_bracket[::-1], spec, [-t for t in times])
    curve = build(times, values)
    report = BootstrapReport()
    cs = CurveSet(curve, {}, CurveMode.SINGLE_CURVE)
    report.residuals = [(q.id, abs(q.residual(cs))) for q in pillars]
    report.knots["1d"] = list(zip(times, values))
    report.sweeps["1d"] = sweeps
    _enforce_tolerance(report, spec)
    return curve, report


def derive_1d_forwards(discount: DiscountCurve, horizon: float | None = None, step_days: int = 1):
    """Overnight simple forwards F(t, t + 1d) on a daily grid of start dates."""
    if horizon is None:
        horizon = float(discount.pillar_times[-1]) if len(discount.pillar_times) else 1.0
    starts = np.arange(0, int(round(horizon * 360)) + 1, step_days) / 360.0
    return starts, simple_forward(discount, starts, starts + 1.0 / 360.0)


def _check_pseudo_df(cs: CurveSet, inst: LinearInstrument, tenor: Tenor) -> None:
    t = inst.last_fixing_time(tenor)
    fwd = modified_forward(cs, tenor, t, t + tenor.year_fraction)
    if 1.0 + tenor.year_fraction * fwd <= 0.0:
        raise BootstrapError(f"negative implied pseudo discount factor (forward {fwd:.6f})", inst.id)


def bootstrap_tenor(
    cs_partial: CurveSet,
    tenor: Tenor,
    reference: Tenor,
    pillars: Sequence[LinearInstrument],
    spec: BootstrapSpec = BootstrapSpec(),
) -> tuple[ForwardingCurve, BootstrapReport]:
    """Spread curve of ``tenor`` over ``reference`` (1d = discount forwards)."""
    if not pillars:
        raise InputError(f"no pillars for tenor {tenor.value}")
    ref_curve = None
    if reference is not Tenor.D1:
        if reference not in cs_partial.forwarding:
            raise InputError(f"reference curve {reference.value} for {tenor.value} is not built")
        ref_curve = cs_partial.forwarding[reference]
    pillars = sorted(pillars, key=lambda q: (q.last_fixing_time(tenor), q.id))
    ids = [q.id for q in pillars]
    times = [q.last_fixing_time(tenor) for q in pillars]
    _check_increasing(ids, times, f"{tenor.value} curve")
    base = CurveSet(cs_partial.discount, dict(cs_partial.forwarding), CurveMode.MULTI_CURVE)

    def build(ts, vs):
        return ForwardingCurve(tenor, base.discount, hermite_curve(list(zip(ts, vs)), Extrapolation.FLAT), ref_curve)

    def residual(k, ts, vs):
        return pillars[k].residual(base.with_curve(build(ts, vs)))

    values, sweeps = _solve_knots(ids, times, residual, spec.spread_bracket, spec)
    curve = build(times, values)
    cs = base.with_curve(curve)
    for q in pillars:
        _check_pseudo_df(cs, q, tenor)
    report = BootstrapReport()
    report.residuals = [(q.id, abs(q.residual(cs))) for q in pillars]
    report.knots[tenor.value] = list(zip(times, values))
    report.sweeps[tenor.value] = sweeps
    _enforce_tolerance(report, spec)
    return curve, report


def _enforce_tolerance(report: BootstrapReport, spec: BootstrapSpec) -> None:
    if not report.residuals:
        return
    worst_id, worst = max(report.residuals, key=lambda p: p[1])
    if not worst <= spec.tolerance:
        raise BootstrapError(f"residual {worst:.3e} exceeds tolerance {spec.tolerance:.1e}", worst_id)


def _pillars_for(instruments: Sequence[LinearInstrument], tenor: Tenor, built: set[Tenor]) -> list[LinearInstrument]:
    out = []
    for q in instruments:
        k = q.kind
        if k in (InstrumentKind.FIXING, InstrumentKind.FRA, InstrumentKind.FUTURE) and q.tenor is tenor:
            out.append(q)
        elif k is InstrumentKind.IRS and q.tenor is tenor and q.start == 0:
            out.append(q)
        elif k is InstrumentKind.BASIS_SWAP and q.start == 0 and tenor in q.tenors:
            other = q.tenor2 if q.tenor is tenor else q.tenor
            if other in built:
                out.append(q)
    return out


def bootstrap_all(quotes, spec: BootstrapSpec = BootstrapSpec()) -> tuple[CurveSet, BootstrapReport]:
    """Discount curve plus every forwarding curve the quotes support.

    ``quotes`` is a QuoteSet or a sequence of LinearInstrument. Forward-starting
    swaps are not pillars; they remain available for validation.
    """
    instruments = _linear(quotes)
    if not instruments:
        raise InputError("empty quote set")
    discount, report = bootstrap_discount(instruments, spec)
    cs = CurveSet(discount)
    built: set[Tenor] = {Tenor.D1}
    for tenor, reference in spec.ordering:
        if reference not in built:
            msg = f"reference {reference.value} for {tenor.value} unavailable; using discount forwards"
            warnings.warn(msg, stacklevel=2)
            report.warnings.append(msg)
            reference = Tenor.D1
        pillars = _pillars_for(instruments, tenor, built)
        if not pillars:
            msg = f"no quotes for tenor {tenor.value}; curve skipped"
            log.warning(msg)
            report.warnings.append(msg)
            continue
        curve, sub = bootstrap_tenor(cs, tenor, reference, pillars, spec)
        cs = cs.with_curve(curve)
        built.add(tenor)
        report.residuals.extend(sub.residuals)
        report.knots.update(sub.knots)
        report.sweeps.update(sub.sweeps)
    return cs, report


def bootstrap_single_curve(quotes, tenor: Tenor = Tenor.M6, spec: BootstrapSpec = BootstrapSpec()) -> tuple[CurveSet, BootstrapReport]:
    """Classical one-curve bootstrap from the fixing, FRAs and spot swaps of one tenor.

    The resulting curve both discounts and projects every tenor.
    """
    instruments = _linear(quotes)
    pillars = [
        q for q in instruments
        if q.tenor is tenor and (
            q.kind in (InstrumentKind.FIXING, InstrumentKind.FRA, InstrumentKind.FUTURE)
            or (q.kind is InstrumentKind.IRS and q.start == 0)
        )
    ]
    if not pillars:
        raise InputError(f"single-curve bootstrap needs {tenor.value} instruments")
    pillars.sort(key=lambda q: (q.end, q.id))
    ids = [q.id for q in pillars]
    times = [to_time(q.end) for q in pillars]
    _check_increasing(ids, times, "single curve")

    def build(ts, vs):
        return CurveSet(DiscountCurve.from_knots(ts, vs), {}, CurveMode.SINGLE_CURVE)

    def residual(k, ts, vs):
        return pillars[k].residual(build(ts, vs))

    values, sweeps = _solve_knots(ids, times, residual, spec.rate_bracket[::-1], spec, [-t for t in times])
    cs = build(times, values)
    report = BootstrapReport()
    report.residuals = [(q.id, abs(q.residual(cs))) for q in pillars]
    report.knots[f"single-{tenor.value}"] = list(zip(times, values))
    report.sweeps[f"single-{tenor.value}"] = sweeps
    _enforce_tolerance(report, spec)
    return cs, report


def _linear(quotes) -> list[LinearInstrument]:
    if hasattr(quotes, "linear_instruments"):
        return list(quotes.linear_instruments())
    return list(quotes)
