"""Plot-data tables (CSV) for the standard result figures.

Every table is a header plus rows of plain values; floats are written with
their shortest round-trip representation so identical inputs give identical
files.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .cms import (
    CmsMode,
    SpreadVariant,
    calibrate_flat_correlation,
    cms_fair_spread,
    spread_option_inputs,
    price_from_inputs,
)
from .curves import CurveMode, CurveSet, modified_forward, simple_forward
from .errors import InputError
from .instruments import InstrumentKind
from .marketdata import QuoteSet
from .timegrid import FORWARDING_TENORS, Tenor
from .volmodels import forward_swap_rate, sabr_implied_vol

BP = 1e4


class Figure(str, enum.Enum):
    FWD_CURVES = "FWD_CURVES"
    FWD_SWAP_GRID = "FWD_SWAP_GRID"
    SWAPTION_GRID = "SWAPTION_GRID"
    CMS_CURVES = "CMS_CURVES"
    SPREAD_OPTIONS = "SPREAD_OPTIONS"
    MMG_CALIB = "MMG_CALIB"

    @classmethod
    def parse(cls, value) -> "Figure":
        try:
            return cls(str(getattr(value, "value", value)).strip().upper().replace("-", "_"))
        except ValueError:
            raise InputError(f"unknown figure {value!r}; choose from {', '.join(f.value for f in cls)}") from None


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: tuple[tuple, ...]

    def column(self, name: str) -> list:
        j = self.header.index(name)
        return [r[j] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _need(value, what: str, figure: Figure):
    if value is None:
        raise InputError(f"{figure.value} needs {what}")
    return value


def fwd_curves_table(curves: CurveSet, horizon: Optional[float] = None, step_days: int = 30) -> Table:
    """Forward rate per tenor on a monthly start grid with its spread over the 1d forward."""
    if horizon is None:
        pillars = curves.discount.pillar_times
        horizon = float(pillars[-1]) if len(pillars) else 30.0
    starts = np.arange(0, int(round(horizon * 360)) + 1, step_days) / 360.0
    base = np.asarray(simple_forward(curves.discount, starts, starts + Tenor.D1.year_fraction), float)
    rows = [("1d", s, f, 0.0) for s, f in zip(starts, base)]
    for tenor in FORWARDING_TENORS:
        if curves.mode is not CurveMode.MULTI_CURVE or tenor not in curves.forwarding:
            continue
        fwd = np.asarray(modified_forward(curves, tenor, starts, starts + tenor.year_fraction), float)
        rows.extend((tenor.value, s, f, f - b) for s, f, b in zip(starts, fwd, base))
    return Table(("tenor", "forward_start_yf", "forward_rate", "spread_over_1d"), tuple(rows))


def fwd_swap_grid_table(quotes: QuoteSet, curves: CurveSet, single6m: Optional[CurveSet] = None) -> Table:
    """Forward-start swap repricing errors (model minus market, bp) by start and length."""
    rows = []
    for inst in quotes.linear_instruments():
        if inst.kind is not InstrumentKind.IRS or inst.start == 0:
            continue
        mkt = inst.market_rate
        multi = (inst.model_rate(curves) - mkt) * BP
        single = (inst.model_rate(curves.single()) - mkt) * BP
        row = [inst.id, inst.start / 360.0, (inst.end - inst.start) / 360.0, inst.tenor.value, mkt, single, multi]
        if single6m is not None:
            row.append((inst.model_rate(single6m) - mkt) * BP)
        rows.append(tuple(row))
    header = ["id", "start", "length", "tenor", "market", "single_bp", "multi_bp"]
    if single6m is not None:
        header.append("single6m_bp")
    rows.sort(key=lambda r: (r[1], r[2], r[0]))
    return Table(tuple(header), tuple(rows))


def swaption_grid_table(quotes: QuoteSet, curves: CurveSet, surface, mode=CmsMode.MULTI) -> Table:
    """Quoted against SABR vols per (expiry, tenor, strike offset)."""
    mode = mode if isinstance(mode, CmsMode) else CmsMode(str(mode).upper())
    cs = curves if mode is CmsMode.MULTI else curves.single()
    rows = []
    for q in quotes.swaption_quotes():
        S = forward_swap_rate(cs, q.expiry, q.tenor, q.float_tenor)
        K = q.strike_for(S)
        model = float(sabr_implied_vol(surface.slice(q.expiry, q.tenor), S, K, q.expiry)) if K > 0 else float("nan")
        rows.append((q.id, q.expiry, q.tenor, q.strike_offset, K, q.vol, model, (model - q.vol) * BP))
    rows.sort(key=lambda r: (r[2], r[1], r[3]))
    return Table(("id", "expiry", "tenor", "strike_offset", "strike", "market_vol", "model_vol", "error_bp"), tuple(rows))


def cms_curves_table(quotes: QuoteSet, curves: CurveSet, surface, single: Optional[CurveSet] = None,
                     modes: Sequence[CmsMode] = (CmsMode.SINGLE, CmsMode.MULTI, CmsMode.HYBRID)) -> Table:
    """CMS spreads in bp: market with bid/ask and the model under each curve mode."""
    rows = []
    for spec in quotes.cms_specs():
        vals = [cms_fair_spread(curves, surface, spec, m, single) * BP for m in modes]
        rows.append((spec.id, spec.maturity, spec.c, None if spec.quote is None else spec.quote * BP,
                     None if spec.bid is None else spec.bid * BP,
                     None if spec.ask is None else spec.ask * BP, *vals))
    rows.sort(key=lambda r: (r[2], r[1]))
    header = ("id", "maturity", "index_tenor", "market_bp", "bid_bp", "ask_bp") + tuple(f"{m.value.lower()}_bp" for m in modes)
    return Table(header, tuple(rows))


def spread_options_table(quotes: QuoteSet, curves: CurveSet, surface, variant=SpreadVariant.AS_PRINTED) -> Table:
    """Spread-option prices with the flat correlation implied per strike and the refit error."""
    specs = [s for s in quotes.spread_option_specs() if s.price is not None]
    if not specs:
        return Table(("id", "expiry", "strike", "market", "model", "implied_rho", "error_bp"), ())
    rhos = calibrate_flat_correlation(specs, curves, surface, variant)
    rows = []
    for s in specs:
        rho = rhos[s.strike]
        inp = spread_option_inputs(curves, surface, s)
        model = price_from_inputs(inp, rho, variant)
        rows.append((s.id, s.expiry, s.strike, s.price, model, rho, (model - s.price) * BP))
    rows.sort(key=lambda r: (r[2], r[1]))
    return Table(("id", "expiry", "strike", "market", "model", "implied_rho", "error_bp"), tuple(rows))


def mmg_calib_table(calibration) -> Table:
    """Per-target calibration errors (absolute bp and relative %)."""
    targets = calibration.targets if hasattr(calibration, "targets") else calibration["targets"]
    rows = []
    for t in targets:
        d = t if isinstance(t, dict) else t.__dict__
        rows.append((d["id"], d["kind"], d["market"], d["model"], d["error_bp"], 100.0 * d["error_rel"]))
    return Table(("id", "kind", "market", "model", "error_bp", "error_pct"), tuple(rows))


def report_figures(figure, out=None, *, quotes: Optional[QuoteSet] = None, curves: Optional[CurveSet] = None,
                   single6m: Optional[CurveSet] = None, surface=None, calibration=None, mode=CmsMode.MULTI) -> Table:
    """Build the plot-data table of ``figure`` and write it to ``out`` when given."""
    fig = Figure.parse(figure)
    if fig is Figure.FWD_CURVES:
        table = fwd_curves_table(_need(curves, "curves", fig))
    elif fig is Figure.FWD_SWAP_GRID:
        table = fwd_swap_grid_table(_need(quotes, "quotes", fig), _need(curves, "curves", fig), single6m)
    elif fig is Figure.SWAPTION_GRID:
        table = swaption_grid_table(_need(quotes, "quotes", fig), _need(curves, "curves", fig),
                                    _need(surface, "a SABR surface", fig), mode)
    elif fig is Figure.CMS_CURVES:
        table = cms_curves_table(_need(quotes, "quotes", fig), _need(curves, "curves", fig),
                                 _need(surface, "a SABR surface", fig), single6m)
    elif fig is Figure.SPREAD_OPTIONS:
        table = spread_options_table(_need(quotes, "quotes", fig), _need(curves, "curves", fig),
                                     _need(surface, "a SABR surface", fig))
    else:
        table = mmg_calib_table(_need(calibration, "an MMG calibration report", fig))
    if out is not None:
        try:
            Path(out).write_text(table.to_csv())
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc.strerror}") from None
    return table


__all__ = [
    "Figure",
    "Table",
    "cms_curves_table",
    "fwd_curves_table",
    "fwd_swap_grid_table",
    "mmg_calib_table",
    "report_figures",
    "spread_options_table",
    "swaption_grid_table",
]
