"""Quote files, the synthetic reference scenario and JSON persistence.

Quote CSV columns (header mandatory)::

    section,id,start,end,tenor,tenor2,value,bid,ask[,strike,end2,settlement]

``start``/``end`` are day serials or periods from the snapshot (``18m``,
``5y``). All rates, spreads and vols are decimals. Section-specific meaning:

* ``ois``, ``fixing``, ``fra``, ``irs``: a rate on [start, end] indexed on ``tenor``.
* ``future``: price quote (100 - rate * 100) on the ``tenor`` rate.
* ``basis``: spread paid on the ``tenor`` leg against the ``tenor2`` leg.
* ``swaption``: ``start`` is the expiry, ``end`` the swap end, ``value`` the
  Black vol, ``strike`` the offset from the forward swap rate, ``tenor`` the
  floating index of the underlying.
* ``cms``: swap ending at ``end`` paying ``tenor`` floating, indexed on the
  ``end2``-long swap rate whose floating leg is ``tenor2``; value is the spread.
* ``spread_option``: expiry ``start``, swap ends ``end`` and ``end2``,
  ``strike`` K, value the option price.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .curves import CurveMode, CurveSet, DiscountCurve, ForwardingCurve, flat_curve_set
from .errors import InputError
from .instruments import InstrumentKind, LinearInstrument
from .interpolation import Extrapolation, hermite_curve
from .timegrid import Tenor, parse_period

CSV_COLUMNS = ("section", "id", "start", "end", "tenor", "tenor2", "value", "bid", "ask")
OPTIONAL_COLUMNS = ("strike", "end2", "settlement")
SECTIONS = ("ois", "fixing", "fra", "future", "irs", "basis", "swaption", "cms", "spread_option")
_LINEAR_KIND = {
    "ois": InstrumentKind.OIS,
    "fixing": InstrumentKind.FIXING,
    "fra": InstrumentKind.FRA,
    "future": InstrumentKind.FUTURE,
    "irs": InstrumentKind.IRS,
    "basis": InstrumentKind.BASIS_SWAP,
}

QUOTES_SCHEMA = "multicurve.quotes/1"
CURVES_SCHEMA = "multicurve.curveset/1"
SABR_SCHEMA = "multicurve.sabr_surface/1"
MMG_SCHEMA = "multicurve.mmg_model/1"
REPORT_SCHEMA = "multicurve.report/1"


@dataclass(frozen=True)
class QuoteRow:
    section: str
    id: str
    start: int
    end: int
    value: float
    tenor: Optional[Tenor] = None
    tenor2: Optional[Tenor] = None
    bid: Optional[float] = None
    ask: Optional[float] = None
    strike: Optional[float] = None
    end2: Optional[int] = None
    settlement: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "section": self.section,
            "id": self.id,
            "start": self.start,
            "end": self.end,
            "tenor": self.tenor.value if self.tenor else None,
            "tenor2": self.tenor2.value if self.tenor2 else None,
            "value": self.value,
            "bid": self.bid,
            "ask": self.ask,
            "strike": self.strike,
            "end2": self.end2,
            "settlement": self.settlement,
        }


@dataclass(frozen=True)
class QuoteSet:
    rows: tuple[QuoteRow, ...]
    snapshot_date: int = 0
    parse_report: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        seen: set[str] = set()
        for n, r in enumerate(self.rows, start=1):
            if r.id in seen:
                raise InputError(f"duplicate identifier {r.id!r} (row {n})")
            seen.add(r.id)
            if r.section not in SECTIONS:
                raise InputError(f"row {n}: unknown section {r.section!r}")
            if not math.isfinite(r.value):
                raise InputError(f"row {n} ({r.id}): value is not finite")
            if r.bid is not None and r.ask is not None and r.bid > r.ask:
                raise InputError(f"row {n} ({r.id}): bid {r.bid} above ask {r.ask}")
            if r.bid is not None and r.value < r.bid or r.ask is not None and r.value > r.ask:
                raise InputError(f"row {n} ({r.id}): value outside [bid, ask]")

    def __len__(self) -> int:
        return len(self.rows)

    def section(self, name: str) -> list[QuoteRow]:
        return [r for r in self.rows if r.section == name]

    def by_id(self, ident: str) -> QuoteRow:
        for r in self.rows:
            if r.id == ident:
                return r
        raise InputError(f"no quote with id {ident!r}")

    def linear_instruments(self) -> list[LinearInstrument]:
        out = []
        for r in self.rows:
            kind = _LINEAR_KIND.get(r.section)
            if kind is None:
                continue
            tenor = r.tenor or (Tenor.D1 if kind is InstrumentKind.OIS else Tenor.M6)
            out.append(LinearInstrument(r.id, kind, r.start, r.end, r.value, tenor, r.tenor2))
        return out

    def swaption_quotes(self):
        from .volmodels import Settlement, SwaptionQuote

        return [
            SwaptionQuote(
                expiry=r.start / 360.0,
                tenor=(r.end - r.start) / 360.0,
                vol=r.value,
                strike_offset=r.strike or 0.0,
                settlement=Settlement(r.settlement or "CASH"),
                float_tenor=r.tenor or Tenor.M6,
                id=r.id,
            )
            for r in self.section("swaption")
        ]

    def cms_specs(self):
        from .cms import CmsSwapSpec

        out = []
        for r in self.section("cms"):
            if r.end2 is None:
                raise InputError(f"cms quote {r.id}: end2 (index swap length) missing")
            ft = r.tenor or Tenor.M3
            n = r.end // ft.days
            out.append(CmsSwapSpec(n, r.end2 / 360.0, ft.year_fraction, ft, r.tenor2 or Tenor.M6, r.id, r.value, r.bid, r.ask))
        return out

    def spread_option_specs(self):
        from .cms import SpreadOptionSpec

        out = []
        for r in self.section("spread_option"):
            if r.end2 is None or r.strike is None:
                raise InputError(f"spread option {r.id}: end2 and strike are required")
            out.append(SpreadOptionSpec(r.start / 360.0, (r.end - r.start) / 360.0, (r.end2 - r.start) / 360.0, r.strike, r.value, None, r.id))
        return out


def _opt_float(text: str | None, row: int, col: str) -> Optional[float]:
    if text is None or str(text).strip() == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise InputError(f"row {row}, column {col}: not a number: {text!r}") from None


def _opt_tenor(text, row: int, col: str) -> Optional[Tenor]:
    if text is None or str(text).strip() == "":
        return None
    try:
        return Tenor.parse(str(text))
    except InputError:
        raise InputError(f"row {row}, column {col}: unknown tenor label {text!r}") from None


def _period(text, row: int, col: str) -> int:
    try:
        return parse_period(text)
    except InputError:
        raise InputError(f"row {row}, column {col}: cannot parse period {text!r}") from None


def _row_from_mapping(rec: Mapping, n: int) -> QuoteRow:
    for col in ("section", "id", "start", "end", "value"):
        if rec.get(col) is None or str(rec.get(col)).strip() == "":
            raise InputError(f"row {n}, column {col}: required value missing")
    section = str(rec["section"]).strip().lower()
    if section not in SECTIONS:
        raise InputError(f"row {n}, column section: unknown section {rec['section']!r}")
    value = _opt_float(rec["value"], n, "value")
    end2 = rec.get("end2")
    return QuoteRow(
        section=section,
        id=str(rec["id"]).strip(),
        start=_period(rec["start"], n, "start"),
        end=_period(rec["end"], n, "end"),
        value=value,
        tenor=_opt_tenor(rec.get("tenor"), n, "tenor"),
        tenor2=_opt_tenor(rec.get("tenor2"), n, "tenor2"),
        bid=_opt_float(rec.get("bid"), n, "bid"),
        ask=_opt_float(rec.get("ask"), n, "ask"),
        strike=_opt_float(rec.get("strike"), n, "strike"),
        end2=None if end2 in (None, "") else _period(end2, n, "end2"),
        settlement=(str(rec["settlement"]).strip().upper() or None) if rec.get("settlement") not in (None, "") else None,
    )


def _build(records, snapshot_date: int = 0) -> QuoteSet:
    rows, report = [], []
    for n, rec in enumerate(records, start=1):
        row = _row_from_mapping(rec, n)
        rows.append(row)
        report.append(f"row {n}: {row.section} {row.id} start={row.start} end={row.end} value={row.value!r}")
    try:
        return QuoteSet(tuple(rows), snapshot_date, tuple(report))
    except InputError:
        raise


def load_quotes(path, format: str | None = None) -> QuoteSet:
    """Read a quote file; ``format`` is CSV or JSON (default: from the suffix)."""
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).upper()
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read quotes {path}: {exc.strerror}") from None
    if fmt == "JSON":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
        if doc.get("schema") != QUOTES_SCHEMA:
            raise InputError(f"{path}: unsupported schema {doc.get('schema')!r}")
        return _build(doc.get("rows", []), int(doc.get("snapshot_date", 0)))
    if fmt != "CSV":
        raise InputError(f"unknown quote format {fmt!r}")
    reader = csv.DictReader(text.splitlines())
    header = reader.fieldnames or []
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise InputError(f"{path}: header row missing columns {', '.join(missing)}")
    unknown = [c for c in header if c not in CSV_COLUMNS + OPTIONAL_COLUMNS]
    if unknown:
        raise InputError(f"{path}: unknown columns {', '.join(unknown)}")
    return _build(list(reader))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_quotes(qs: QuoteSet, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = {"schema": QUOTES_SCHEMA, "snapshot_date": qs.snapshot_date, "rows": [r.to_dict() for r in qs.rows]}
        path.write_text(json.dumps(doc, indent=1) + "\n")
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS + OPTIONAL_COLUMNS)
        for r in qs.rows:
            d = r.to_dict()
            w.writerow([_fmt(d[c]) for c in CSV_COLUMNS + OPTIONAL_COLUMNS])


# -- reference scenario -----------------------------------------------------

DEFAULT_SPREADS = {Tenor.M1: 0.0010, Tenor.M3: 0.0020, Tenor.M6: 0.0040, Tenor.M12: 0.0060}
SWAP_YEARS = (2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 15, 20, 25, 30)


@dataclass(frozen=True)
class ReferenceScenario:
    """Generator parameters for a self-consistent synthetic market."""

    ois_rate: float = 0.02
    spreads: Mapping[Tenor, float] = field(default_factory=lambda: dict(DEFAULT_SPREADS))
    atm_vol: float = 0.20
    sabr_beta: float = 0.5
    sabr_rho: float = -0.2
    sabr_epsilon: float = 0.4
    swaption_expiries: tuple[float, ...] = (1.0, 2.0, 5.0, 10.0)
    swaption_tenors: tuple[float, ...] = (2.0, 5.0, 10.0)
    strike_offsets: tuple[float, ...] = (-0.01, -0.005, -0.0025, 0.0, 0.0025, 0.005, 0.01)
    cms_maturities: tuple[int, ...] = (5, 10, 20)
    spread_option_expiries: tuple[float, ...] = (1.0, 2.0, 5.0)
    spread_option_strikes: tuple[float, ...] = (0.0025, 0.005, 0.01)
    spread_correlation: float = 0.8
    forward_grid_starts: tuple[int, ...] = (1, 2, 5, 10)
    forward_grid_tenors: tuple[int, ...] = (1, 2, 5, 10)
    include_options: bool = True
    seed: int = 20100614

    def curves(self) -> CurveSet:
        return flat_curve_set(self.ois_rate, {Tenor(k): v for k, v in self.spreads.items()})

    def sabr_surface(self):
        from .volmodels import SabrSlice, SabrSurface, forward_swap_rate

        cs = self.curves()
        slices = {}
        for e in self.swaption_expiries:
            for t in self.swaption_tenors:
                fwd = forward_swap_rate(cs, e, t)
                alpha = self.atm_vol * fwd ** (1.0 - self.sabr_beta)
                slices[(e, t)] = SabrSlice(alpha, self.sabr_beta, self.sabr_rho, self.sabr_epsilon, e, t)
        return SabrSurface(slices)


def _linear_rows(cs: CurveSet, spreads: Mapping[Tenor, float], grid_starts, grid_tenors) -> list[LinearInstrument]:
    y = 360
    out: list[LinearInstrument] = [LinearInstrument("EONIA", InstrumentKind.FIXING, 0, 1, 0.0, Tenor.D1)]
    for label, end in (("OIS1M", 30), ("OIS3M", 90), ("OIS6M", 180)):
        out.append(LinearInstrument(label, InstrumentKind.OIS, 0, end, 0.0, Tenor.D1))
    for n in (1,) + SWAP_YEARS:
        out.append(LinearInstrument(f"OIS{n}Y", InstrumentKind.OIS, 0, n * y, 0.0, Tenor.D1))
    tenors = [t for t in (Tenor.M6, Tenor.M3, Tenor.M1, Tenor.M12) if t in spreads]
    for t in tenors:
        out.append(LinearInstrument(f"FIX{t.value.upper()}", InstrumentKind.FIXING, 0, t.days, 0.0, t))
    if Tenor.M6 in spreads:
        for k in range(1, 13):
            out.append(LinearInstrument(f"FRA{k}X{k + 6}", InstrumentKind.FRA, 30 * k, 30 * k + 180, 0.0, Tenor.M6))
        for n in SWAP_YEARS:
            out.append(LinearInstrument(f"IRS{n}Y_6M", InstrumentKind.IRS, 0, n * y, 0.0, Tenor.M6))
        for s in grid_starts:
            for n in grid_tenors:
                out.append(LinearInstrument(f"IRS{s}Y{n}Y_6M", InstrumentKind.IRS, s * y, (s + n) * y, 0.0, Tenor.M6))
    if Tenor.M3 in spreads:
        for k in (1, 2):
            out.append(LinearInstrument(f"FRA{k}X{k + 3}", InstrumentKind.FRA, 30 * k, 30 * k + 90, 0.0, Tenor.M3))
        for k in range(1, 7):
            out.append(LinearInstrument(f"FUT{k}", InstrumentKind.FUTURE, 90 * k, 90 * k + 90, 0.0, Tenor.M3))
        if Tenor.M6 in spreads:
            for n in SWAP_YEARS:
                out.append(LinearInstrument(f"BS{n}Y_3V6", InstrumentKind.BASIS_SWAP, 0, n * y, 0.0, Tenor.M3, Tenor.M6))
    if Tenor.M1 in spreads and Tenor.M3 in spreads:
        for n in (1,) + SWAP_YEARS:
            out.append(LinearInstrument(f"BS{n}Y_1V3", InstrumentKind.BASIS_SWAP, 0, n * y, 0.0, Tenor.M1, Tenor.M3))
    if Tenor.M12 in spreads:
        for k in (3, 6, 9):
            out.append(LinearInstrument(f"FRA{k}X{k + 12}", InstrumentKind.FRA, 30 * k, 30 * k + 360, 0.0, Tenor.M12))
        if Tenor.M6 in spreads:
            for n in SWAP_YEARS:
                out.append(LinearInstrument(f"BS{n}Y_6V12", InstrumentKind.BASIS_SWAP, 0, n * y, 0.0, Tenor.M6, Tenor.M12))
    return out


_SECTION_OF = {v: k for k, v in _LINEAR_KIND.items()}


def generate_reference_scenario(params: ReferenceScenario = ReferenceScenario()) -> QuoteSet:
    """Quotes priced off known flat curves (and a known SABR surface) with this library's pricers."""
    cs = params.curves()
    rng = np.random.default_rng(params.seed)
    rows: list[QuoteRow] = []

    def band(value: float, width: float):
        h = width * (0.5 + rng.random())
        return value - h, value + h

    for inst in _linear_rows(cs, params.spreads, params.forward_grid_starts, params.forward_grid_tenors):
        rate = inst.model_rate(cs)
        value = 100.0 * (1.0 - rate) if inst.kind is InstrumentKind.FUTURE else rate
        width = 0.005 if inst.kind is InstrumentKind.FUTURE else 0.5e-4
        bid, ask = band(value, width)
        tenor = None if inst.kind is InstrumentKind.OIS else inst.tenor
        rows.append(QuoteRow(_SECTION_OF[inst.kind], inst.id, inst.start, inst.end, value, tenor, inst.tenor2, bid, ask))
    if params.include_options and Tenor.M6 in params.spreads:
        rows.extend(_option_rows(params, cs, band))
    return QuoteSet(tuple(rows))


def _option_rows(params: ReferenceScenario, cs: CurveSet, band) -> list[QuoteRow]:
    from .cms import CmsSwapSpec, SpreadOptionSpec, SpreadVariant, cms_fair_spread, spread_option_price
    from .volmodels import forward_swap_rate

    surface = params.sabr_surface()
    rows = []
    for (e, t), sl in sorted(surface.slices.items()):
        fwd = forward_swap_rate(cs, e, t)
        for off in params.strike_offsets:
            if fwd + off <= 0:
                continue
            vol = float(surface.vol(e, t, fwd + off, fwd))
            bid, ask = band(vol, 0.002)
            a = int(round(e * 360))
            rows.append(QuoteRow("swaption", f"SWO{e:g}Y{t:g}Y{off * 1e4:+.0f}", a, a + int(round(t * 360)), vol,
                                 Tenor.M6, None, bid, ask, off, None, "CASH"))
    if Tenor.M3 in params.spreads:
        for c in params.swaption_tenors:
            for m in params.cms_maturities:
                spec = CmsSwapSpec(4 * m, c)
                x = cms_fair_spread(cs, surface, spec, "MULTI")
                bid, ask = band(x, 1e-4)
                rows.append(QuoteRow("cms", f"CMS{m}Y_{c:g}Y", 0, m * 360, x, Tenor.M3, Tenor.M6, bid, ask,
                                     None, int(round(c * 360))))
    tenors = sorted(params.swaption_tenors)
    if len(tenors) >= 2:
        tb, tc = tenors[-1], tenors[0]
        for e in params.spread_option_expiries:
            for k in params.spread_option_strikes:
                spec = SpreadOptionSpec(e, tb, tc, k, rho=params.spread_correlation)
                px = spread_option_price(cs, surface, spec, SpreadVariant.AS_PRINTED)
                bid, ask = band(px, 1e-5)
                a = int(round(e * 360))
                rows.append(QuoteRow("spread_option", f"SO{e:g}Y_{tb:g}Y{tc:g}Y_K{k * 1e4:.0f}", a,
                                     a + int(round(tb * 360)), px, None, None, bid, ask, k, a + int(round(tc * 360))))
    return rows


# -- persistence ------------------------------------------------------------

def _interp_to_dict(ic) -> dict:
    return {"x": ic.x.tolist(), "y": ic.y.tolist(), "extrapolation": ic.extrapolation.value}


def _interp_from_dict(d):
    return hermite_curve(list(zip(d["x"], d["y"])), Extrapolation(d["extrapolation"]))


def curveset_to_dict(cs: CurveSet) -> dict:
    fwd = []
    for tenor in sorted(cs.forwarding, key=lambda t: t.months):
        c = cs.forwarding[tenor]
        fwd.append({"tenor": tenor.value, "reference": c.reference_tenor.value, "spread": _interp_to_dict(c.spread_interp)})
    return {
        "schema": CURVES_SCHEMA,
        "mode": cs.mode.value,
        "snapshot_date": cs.discount.snapshot_date,
        "discount": _interp_to_dict(cs.discount.interp),
        "forwarding": fwd,
    }


def curveset_from_dict(doc: Mapping) -> CurveSet:
    if doc.get("schema") != CURVES_SCHEMA:
        raise InputError(f"unsupported curve schema {doc.get('schema')!r}")
    disc = DiscountCurve(_interp_from_dict(doc["discount"]), int(doc.get("snapshot_date", 0)))
    built: dict[Tenor, ForwardingCurve] = {}
    pending = list(doc.get("forwarding", []))
    while pending:
        progressed = False
        for entry in list(pending):
            ref = Tenor.parse(entry["reference"])
            if ref is not Tenor.D1 and ref not in built:
                continue
            tenor = Tenor.parse(entry["tenor"])
            built[tenor] = ForwardingCurve(tenor, disc, _interp_from_dict(entry["spread"]), built.get(ref))
            pending.remove(entry)
            progressed = True
        if not progressed:
            raise InputError("curve file has unresolved forwarding-curve references")
    return CurveSet(disc, built, CurveMode(doc.get("mode", "MULTI_CURVE")))


def sabr_to_dict(surface) -> dict:
    cells = [
        {"expiry": e, "tenor": t, "alpha": s.alpha, "beta": s.beta, "rho": s.rho, "epsilon": s.epsilon}
        for (e, t), s in sorted(surface.slices.items())
    ]
    return {"schema": SABR_SCHEMA, "slices": cells}


def sabr_from_dict(doc: Mapping):
    from .volmodels import SabrSlice, SabrSurface

    if doc.get("schema") != SABR_SCHEMA:
        raise InputError(f"unsupported SABR schema {doc.get('schema')!r}")
    slices = {}
    for c in doc["slices"]:
        slices[(c["expiry"], c["tenor"])] = SabrSlice(c["alpha"], c["beta"], c["rho"], c["epsilon"], c["expiry"], c["tenor"])
    return SabrSurface(slices)


def to_document(artifact) -> dict:
    from .mmg.model import MmgModel
    from .volmodels import SabrSurface

    if isinstance(artifact, CurveSet):
        return curveset_to_dict(artifact)
    if isinstance(artifact, SabrSurface):
        return sabr_to_dict(artifact)
    if isinstance(artifact, MmgModel):
        return artifact.to_dict()
    if isinstance(artifact, QuoteSet):
        return {"schema": QUOTES_SCHEMA, "snapshot_date": artifact.snapshot_date, "rows": [r.to_dict() for r in artifact.rows]}
    if hasattr(artifact, "to_dict"):
        return {"schema": REPORT_SCHEMA, "report": artifact.to_dict()}
    if isinstance(artifact, Mapping):
        return {"schema": REPORT_SCHEMA, "report": dict(artifact)}
    raise InputError(f"cannot persist object of type {type(artifact).__name__}")


def from_document(doc: Mapping):
    from .mmg.model import MmgModel

    schema = doc.get("schema")
    if schema == CURVES_SCHEMA:
        return curveset_from_dict(doc)
    if schema == SABR_SCHEMA:
        return sabr_from_dict(doc)
    if schema == MMG_SCHEMA:
        return MmgModel.from_dict(doc)
    if schema == QUOTES_SCHEMA:
        return _build(doc.get("rows", []), int(doc.get("snapshot_date", 0)))
    if schema == REPORT_SCHEMA:
        return doc["report"]
    raise InputError(f"unknown or unsupported schema {schema!r}")


def dumps(artifact) -> str:
    return json.dumps(to_document(artifact), indent=1, sort_keys=False, allow_nan=True) + "\n"


def persist(artifact, path) -> None:
    """Write ``artifact`` as versioned JSON; floats keep their shortest round-trip repr."""
    path = Path(path)
    try:
        path.write_text(dumps(artifact))
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def load_artifact(path, expect: str | None = None):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from None
    if expect is not None and doc.get("schema") != expect:
        raise InputError(f"{path}: expected schema {expect!r}, found {doc.get('schema')!r}")
    return from_document(doc)


__all__ = [
    "CSV_COLUMNS",
    "QuoteRow",
    "QuoteSet",
    "ReferenceScenario",
    "curveset_from_dict",
    "curveset_to_dict",
    "dumps",
    "from_document",
    "generate_reference_scenario",
    "load_artifact",
    "load_quotes",
    "persist",
    "to_document",
    "write_quotes",
]
