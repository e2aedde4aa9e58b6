"""Command-line front end.

Verbs: ``scenario``, ``bootstrap``, ``price {irs,basis,fra,swaption,cms,cms-spread-option}``,
``calibrate {sabr,mmg}``, ``simulate`` and ``report``. Exit code 0 on success,
1 on bad input or usage, 2 on numerical failure. Results go to the files named
on the command line (tables to standard output when ``--out`` is omitted) and
logs to standard error.

Option values come from the command line first, then from a JSON config file
(``--config`` or the ``MULTICURVE_CONFIG`` environment variable), then from the
built-in defaults. The config document looks like::

    {"schema": "multicurve.config/1",
     "options": {"simulate": {"paths": 100000}, "price swaption": {"method": "mmg"}}}

where a ``"verb sub"`` section overrides a ``"verb"`` section.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .bootstrap import BootstrapSpec, bootstrap_all, bootstrap_single_curve
from .calibration.levmar import LmOptions
from .calibration.mmg_fit import MmgStructure, calibrate_mmg
from .calibration.sabr import calibrate_sabr_surface
from .cms import (
    CmsMode,
    CmsSwapSpec,
    SpreadOptionSpec,
    SpreadVariant,
    calibrate_flat_correlation,
    cms_fair_spread,
    spread_option_price,
)
from .curves import CurveSet
from .errors import InputError, MulticurveError, NumericalError
from .instruments import Convexity, InstrumentKind, LinearInstrument, fra_par_rate
from .marketdata import (
    CURVES_SCHEMA,
    MMG_SCHEMA,
    SABR_SCHEMA,
    DEFAULT_SPREADS,
    ReferenceScenario,
    generate_reference_scenario,
    load_artifact,
    load_quotes,
    persist,
    write_quotes,
)
from .mmg.pricing import PricingMethod, cms_spread_mmg, mmg_implied_vol, swaption_price_mmg
from .mmg.simulation import McConfig, mc_mean, simulate_paths
from .reports import Figure, Table, report_figures
from .timegrid import Tenor, parse_period
from .volmodels import Settlement, SwaptionQuote, forward_swap_rate, swaption_price

log = logging.getLogger("multicurve")

CONFIG_ENV = "MULTICURVE_CONFIG"
CONFIG_SCHEMA = "multicurve.config/1"
BP = 1e4


class UsageError(Exception):
    def __init__(self, usage: str, message: str):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(self.format_usage(), message)


# -- argument types ---------------------------------------------------------


def _years(text: str) -> float:
    """``'5y'``, ``'18m'`` or a bare number of years."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return parse_period(text) / 360.0
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _days(text: str) -> int:
    try:
        return parse_period(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _tenor(text: str) -> Tenor:
    try:
        return Tenor.parse(text)
    except (InputError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(_years(t) for t in str(text).split(",") if t.strip())
    except argparse.ArgumentTypeError:
        raise
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_grid(text: str) -> np.ndarray:
    """Time grid ``start:stop:step`` (inclusive of stop) or a comma list of times."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"grid {text!r}: expected start:stop:step")
        a, b, h = (_years(p) for p in parts)
        if not h > 0 or b < a:
            raise InputError(f"grid {text!r}: need step > 0 and stop >= start")
        n = int(np.floor((b - a) / h + 1e-9))
        return a + h * np.arange(n + 1)
    vals = np.array(sorted(_years(p) for p in text.split(",") if p.strip()))
    if vals.size == 0:
        raise InputError("empty time grid")
    return vals


# -- parser -----------------------------------------------------------------


def _out(p, required=False):
    p.add_argument("--out", help="output file [required]" if required else "output file (standard output when omitted)")


def _curve_args(p, mode_choices=("single", "multi")):
    p.add_argument("--curves", help="curve set JSON from `bootstrap` [required]")
    p.add_argument("--mode", choices=mode_choices, help="curve convention (default multi)")
    p.add_argument("--single-curves", help="single-curve set used for SINGLE mode instead of the discount curve")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multicurve", description="Multi-curve interest-rate toolkit.")
    parser.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging on standard error")
    verbs = parser.add_subparsers(dest="verb", metavar="VERB", parser_class=_Parser)

    p = verbs.add_parser("scenario", help="write the synthetic reference quote set")
    _out(p, required=True)
    p.add_argument("--ois-rate", type=float, help="flat OIS rate (default 0.02)")
    p.add_argument("--spread", action="append", metavar="TENOR=VALUE", help="tenor spread over OIS, e.g. 6m=0.004 (repeatable)")
    p.add_argument("--zero-spreads", action="store_true", default=None, help="all tenor spreads zero")
    p.add_argument("--no-options", action="store_true", default=None, help="linear instruments only")
    p.add_argument("--seed", type=int, help="seed for the bid/ask bands")

    p = verbs.add_parser("bootstrap", help="build discount and forwarding curves from quotes")
    p.add_argument("--quotes", help="quote file, CSV or JSON [required]")
    p.add_argument("--out-curves", help="curve set JSON [required]")
    p.add_argument("--report", help="bootstrap report JSON")
    p.add_argument("--tolerance", type=float, help="maximum repricing error (default 1e-8)")
    p.add_argument("--single-out", help="also write a single-curve set bootstrapped from one tenor's swaps")
    p.add_argument("--single-tenor", type=_tenor, help="tenor for --single-out (default 6m)")

    price = verbs.add_parser("price", help="price instruments").add_subparsers(dest="sub", metavar="INSTRUMENT", parser_class=_Parser)
    for name, kind in (("irs", "IRS"), ("basis", "basis swap"), ("fra", "FRA")):
        p = price.add_parser(name, help=f"{kind} fair rates")
        _curve_args(p)
        p.add_argument("--quotes", help=f"price every {kind} in this quote file")
        p.add_argument("--start", type=_days, help="start (period such as 2y; default 0)")
        p.add_argument("--length", type=_days, help="length (period such as 10y)")
        p.add_argument("--tenor", type=_tenor, help="floating tenor (basis: spread leg) (default 6m; basis 3m)")
        if name == "basis":
            p.add_argument("--tenor2", type=_tenor, help="the other basis leg (default 6m)")
        if name == "fra":
            p.add_argument("--convexity", choices=("none", "gaussian"), help="convexity correction (default none)")
            p.add_argument("--model", help="MMG model JSON for gaussian convexity")
        _out(p)

    p = price.add_parser("swaption", help="European swaption prices")
    _curve_args(p)
    p.add_argument("--quotes", help="price every swaption in this quote file")
    p.add_argument("--expiry", type=_years, help="expiry in years (or 5y)")
    p.add_argument("--tenor", type=_years, help="underlying swap length in years")
    p.add_argument("--offset", type=float, help="strike minus forward (default 0)")
    p.add_argument("--strike", type=float, help="absolute strike")
    p.add_argument("--vol", type=float, help="Black volatility")
    p.add_argument("--sabr", help="SABR surface JSON (vols read at the strike)")
    p.add_argument("--settlement", choices=("cash", "physical"), help="default cash")
    p.add_argument("--receiver", action="store_true", default=None, help="receiver instead of payer")
    p.add_argument("--method", choices=("black", "mmg", "mmg-mc"), help="default black")
    p.add_argument("--model", help="MMG model JSON for mmg methods")
    _mc_args(p)
    _out(p)

    p = price.add_parser("cms", help="CMS swap fair spreads")
    _curve_args(p, ("single", "multi", "hybrid"))
    p.add_argument("--sabr", help="SABR surface JSON [required for replication]")
    p.add_argument("--quotes", help="price every CMS swap in this quote file")
    p.add_argument("--maturity", type=_years, help="CMS swap maturity in years")
    p.add_argument("--index", type=_years, help="length of the CMS index swap in years")
    p.add_argument("--float-tenor", type=_tenor, help="floating/CMS payment tenor (default 3m)")
    p.add_argument("--method", choices=("replication", "mmg", "mmg-mc"), help="default replication")
    p.add_argument("--model", help="MMG model JSON for mmg methods")
    _mc_args(p)
    _out(p)

    p = price.add_parser("cms-spread-option", help="CMS spread options")
    _curve_args(p)
    p.add_argument("--sabr", help="SABR surface JSON [required]")
    p.add_argument("--quotes", help="price every spread option in this quote file")
    p.add_argument("--expiry", type=_years, help="option expiry in years")
    p.add_argument("--tenor-b", type=_years, help="long swap length in years")
    p.add_argument("--tenor-c", type=_years, help="short swap length in years")
    p.add_argument("--strike", type=float, help="spread strike")
    p.add_argument("--rho", type=float, help="flat correlation (with --quotes: calibrated per strike when omitted)")
    p.add_argument("--variant", choices=("printed", "martingale"), help="default printed")
    _out(p)

    cal = verbs.add_parser("calibrate", help="calibrate volatility models").add_subparsers(dest="sub", metavar="MODEL", parser_class=_Parser)
    p = cal.add_parser("sabr", help="SABR surface to swaption smiles (and CMS spreads)")
    _curve_args(p, ("single", "multi", "hybrid"))
    p.add_argument("--quotes", help="quote file with swaption (and cms) sections [required]")
    p.add_argument("--out", help="SABR surface JSON [required]")
    p.add_argument("--report", help="calibration report JSON")
    p.add_argument("--beta", type=float, help="fixed beta for every tenor (default: fitted where CMS quotes exist, else 0.5)")
    p.add_argument("--cms-weight", type=float, help="weight of CMS residuals (default 1)")
    p.add_argument("--no-cms", action="store_true", default=None, help="ignore CMS quotes")
    p.add_argument("--max-iterations", type=int, help="LM iteration cap (default 200)")

    p = cal.add_parser("mmg", help="Gaussian mixture model to swaption prices (and CMS spreads)")
    _curve_args(p)
    p.add_argument("--quotes", help="quote file with a swaption section [required]")
    p.add_argument("--out", help="MMG model JSON [required]")
    p.add_argument("--report", help="calibration report JSON (input of `report --figure MMG_CALIB`)")
    p.add_argument("--scenarios", type=int, help="number of scenarios (default 2)")
    p.add_argument("--factors", type=int, choices=(1, 2), help="factors per scenario (default 2)")
    p.add_argument("--expiries", type=_float_list, help="comma list restricting swaption expiries")
    p.add_argument("--tenors", type=_float_list, help="comma list restricting swaption tenors")
    p.add_argument("--with-cms", action="store_true", default=None, help="add CMS spreads to the targets")
    p.add_argument("--cms-weight", type=float, help="weight of CMS residuals (default 1)")
    p.add_argument("--max-iterations", type=int, help="LM iteration cap (default 100)")

    p = verbs.add_parser("simulate", help="Monte Carlo discount factors under an MMG model")
    p.add_argument("--model", help="MMG model JSON [required]")
    p.add_argument("--grid", help="times: start:stop:step or comma list, e.g. 0:10:0.5 [required]")
    p.add_argument("--out", help="summary CSV [required]")
    p.add_argument("--paths-out", help="per-path discount factors CSV")
    _mc_args(p)

    p = verbs.add_parser("report", help="plot-data CSV for a result figure")
    p.add_argument("--figure", type=str.upper, choices=[f.value for f in Figure], help="[required]")
    p.add_argument("--out", help="CSV file [required]")
    p.add_argument("--quotes", help="quote file")
    p.add_argument("--curves", help="curve set JSON")
    p.add_argument("--single-curves", help="single-curve set JSON (extra column/mode)")
    p.add_argument("--sabr", help="SABR surface JSON")
    p.add_argument("--calibration", help="MMG calibration report JSON")
    p.add_argument("--mode", choices=("single", "multi"), help="curves for SWAPTION_GRID forwards (default multi)")
    return parser


def _mc_args(p):
    p.add_argument("--paths", type=int, help="Monte Carlo paths (default 20000)")
    p.add_argument("--seed", type=int, help="Monte Carlo seed (default 20100614)")
    p.add_argument("--threads", type=int, help="worker threads; results do not depend on it (default 1)")
    p.add_argument("--block-size", type=int, help="paths per random-number block (default 8192)")
    p.add_argument("--no-antithetic", action="store_true", default=None, help="plain instead of antithetic sampling")


REQUIRED = {
    "scenario": ("out",),
    "bootstrap": ("quotes", "out_curves"),
    "price irs": ("curves",),
    "price basis": ("curves",),
    "price fra": ("curves",),
    "price swaption": ("curves",),
    "price cms": ("curves",),
    "price cms-spread-option": ("curves", "sabr"),
    "calibrate sabr": ("quotes", "curves", "out"),
    "calibrate mmg": ("quotes", "curves", "out"),
    "simulate": ("model", "grid", "out"),
    "report": ("figure", "out"),
}


# -- config -----------------------------------------------------------------


def load_config(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path}: invalid JSON ({exc.msg})") from None
    if not isinstance(doc, dict) or doc.get("schema") != CONFIG_SCHEMA:
        raise InputError(f"config {path}: expected schema {CONFIG_SCHEMA!r}")
    opts = doc.get("options", {})
    if not isinstance(opts, dict) or not all(isinstance(v, dict) for v in opts.values()):
        raise InputError(f"config {path}: 'options' must map command names to option objects")
    return opts


def _subparser(parser: argparse.ArgumentParser, path: Sequence[str]) -> argparse.ArgumentParser:
    p = parser
    for name in path:
        action = next(a for a in p._actions if isinstance(a, argparse._SubParsersAction))
        p = action.choices[name]
    return p


def _apply_config(parser, args, opts: dict) -> argparse.Namespace:
    """Fill options left unset on the command line from the config sections."""
    command = args.verb if getattr(args, "sub", None) is None else f"{args.verb} {args.sub}"
    merged = dict(opts.get(args.verb, {}))
    if command != args.verb:
        merged.update(opts.get(command, {}))
    sub = _subparser(parser, command.split())
    actions = {a.dest: a for a in sub._actions}
    for key, value in merged.items():
        dest = key.replace("-", "_")
        if dest not in actions or dest == "help":
            raise InputError(f"config: unknown option {key!r} for `{command}`")
        if getattr(args, dest, None) is not None:
            continue
        act = actions[dest]
        if act.type is not None and isinstance(value, str):
            try:
                value = act.type(value)
            except argparse.ArgumentTypeError as exc:
                raise InputError(f"config option {key!r}: {exc}") from None
        if act.choices is not None and value not in act.choices:
            raise InputError(f"config option {key!r}: {value!r} not one of {list(act.choices)}")
        setattr(args, dest, value)
    return args


def _command(args) -> str:
    return args.verb if getattr(args, "sub", None) is None else f"{args.verb} {args.sub}"


def _opt(args, name, default):
    v = getattr(args, name, None)
    return default if v is None else v


# -- helpers ----------------------------------------------------------------


def _curves(path: str) -> CurveSet:
    return load_artifact(path, CURVES_SCHEMA)


def _single_curves(args) -> Optional[CurveSet]:
    if args.single_curves:
        return _curves(args.single_curves)
    if _opt(args, "mode", "multi") != "multi":
        log.warning("no --single-curves given: the single curve projects every tenor off the discount curve")
    return None


def _mode_curves(args) -> CurveSet:
    cs = _curves(args.curves)
    if _opt(args, "mode", "multi") == "single":
        single = _single_curves(args)
        return single if single is not None else cs.single()
    return cs


def _emit(table: Table, out: Optional[str]) -> None:
    text = table.to_csv()
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror}") from None
    log.info("wrote %s (%d rows)", out, len(table.rows))


def _mc_config(args) -> McConfig:
    return McConfig(
        paths=_opt(args, "paths", 20000),
        seed=_opt(args, "seed", 20100614),
        antithetic=not _opt(args, "no_antithetic", False),
        threads=_opt(args, "threads", 1),
        block_size=_opt(args, "block_size", 8192),
    )


# -- verbs ------------------------------------------------------------------


def cmd_scenario(args, parser) -> int:
    base = ReferenceScenario()
    spreads = dict(DEFAULT_SPREADS)
    if args.zero_spreads:
        spreads = {t: 0.0 for t in spreads}
    for item in args.spread or ():
        key, sep, val = item.partition("=")
        if not sep:
            parser.error(f"--spread expects TENOR=VALUE, got {item!r}")
        try:
            spreads[Tenor.parse(key)] = float(val)
        except ValueError as exc:
            raise InputError(f"--spread {item!r}: {exc}") from None
    params = ReferenceScenario(
        ois_rate=_opt(args, "ois_rate", base.ois_rate),
        spreads=spreads,
        include_options=not args.no_options,
        seed=_opt(args, "seed", base.seed),
    )
    qs = generate_reference_scenario(params)
    try:
        write_quotes(qs, args.out)
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc.strerror}") from None
    log.info("wrote %d quotes to %s", len(qs), args.out)
    return 0


def cmd_bootstrap(args, parser) -> int:
    quotes = load_quotes(args.quotes)
    spec = BootstrapSpec(tolerance=_opt(args, "tolerance", 1e-8))
    cs, report = bootstrap_all(quotes, spec)
    persist(cs, args.out_curves)
    log.info("bootstrapped %d instruments, max residual %.3g", len(report.residuals), report.max_residual)
    if args.report:
        persist(report, args.report)
    if args.single_out:
        single, _ = bootstrap_single_curve(quotes, _opt(args, "single_tenor", Tenor.M6), spec)
        persist(single, args.single_out)
    return 0


_LINEAR = {"irs": InstrumentKind.IRS, "basis": InstrumentKind.BASIS_SWAP, "fra": InstrumentKind.FRA}


def cmd_price_linear(args, parser) -> int:
    kind = _LINEAR[args.sub]
    cs = _mode_curves(args)
    model = None
    convexity = Convexity(_opt(args, "convexity", "none").upper()) if kind is InstrumentKind.FRA else Convexity.NONE
    if convexity is Convexity.GAUSSIAN:
        if not args.model:
            parser.error("--convexity gaussian needs --model")
        model = load_artifact(args.model, MMG_SCHEMA)

    def rate(inst):
        if kind is InstrumentKind.FRA:
            return fra_par_rate(cs, inst.start / 360.0, inst.end / 360.0, inst.tenor, convexity, model)
        return inst.model_rate(cs)

    if args.quotes:
        insts = [i for i in load_quotes(args.quotes).linear_instruments() if i.kind is kind]
        rows = [(i.id, i.start / 360.0, i.end / 360.0, i.market_rate, rate(i), (rate(i) - i.market_rate) * BP) for i in insts]
        _emit(Table(("id", "start", "end", "market", "model", "error_bp"), tuple(rows)), args.out)
        return 0
    if args.length is None:
        parser.error("give --quotes or --length")
    start = _opt(args, "start", 0)
    default_tenor = Tenor.M3 if kind is InstrumentKind.BASIS_SWAP else Tenor.M6
    tenor = _opt(args, "tenor", default_tenor)
    tenor2 = _opt(args, "tenor2", Tenor.M6) if kind is InstrumentKind.BASIS_SWAP else None
    inst = LinearInstrument("cli", kind, start, start + args.length, 0.0, tenor, tenor2)
    _emit(Table(("start", "end", "tenor", "rate"), ((start / 360.0, inst.end / 360.0, tenor.value, rate(inst)),)), args.out)
    return 0


def _swaption_quotes(args, parser, cs) -> list[SwaptionQuote]:
    surface = load_artifact(args.sabr, SABR_SCHEMA) if args.sabr else None
    if args.quotes:
        quotes = load_quotes(args.quotes).swaption_quotes()
    else:
        if args.expiry is None or args.tenor is None:
            parser.error("give --quotes or both --expiry and --tenor")
        if args.vol is None and surface is None and _opt(args, "method", "black") == "black":
            parser.error("Black pricing needs --vol or --sabr")
        quotes = [SwaptionQuote(args.expiry, args.tenor, _opt(args, "vol", 0.0), _opt(args, "offset", 0.0), args.strike,
                                Settlement(_opt(args, "settlement", "cash").upper()), not args.receiver, id="cli")]
    if surface is not None:
        out = []
        for q in quotes:
            S = forward_swap_rate(cs, q.expiry, q.tenor, q.float_tenor)
            K = q.strike if q.strike is not None else q.strike_for(S)
            vol = float(surface.vol(q.expiry, q.tenor, K, S))
            out.append(SwaptionQuote(q.expiry, q.tenor, vol, q.strike_offset, q.strike, q.settlement, q.payer, q.float_tenor, q.id))
        quotes = out
    return quotes


def cmd_price_swaption(args, parser) -> int:
    cs = _mode_curves(args)
    quotes = _swaption_quotes(args, parser, cs)
    method = _opt(args, "method", "black")
    rows = []
    if method == "black":
        for q in quotes:
            res = swaption_price(cs, q)
            S = forward_swap_rate(cs, q.expiry, q.tenor, q.float_tenor)
            K = q.strike if q.strike is not None else q.strike_for(S)
            rows.append((q.id, q.expiry, q.tenor, S, K, res.value, 0.0, q.vol))
    else:
        if not args.model:
            parser.error(f"--method {method} needs --model")
        model = load_artifact(args.model, MMG_SCHEMA)
        pm = PricingMethod.MC if method == "mmg-mc" else PricingMethod.QUADRATURE
        config = _mc_config(args)
        for q in quotes:
            res = swaption_price_mmg(model, q, pm, config)
            S = forward_swap_rate(model.curves, q.expiry, q.tenor, q.float_tenor)
            K = q.strike if q.strike is not None else q.strike_for(S)
            try:
                iv = mmg_implied_vol(model, q, res.value)
            except NumericalError:
                iv = float("nan")
            rows.append((q.id, q.expiry, q.tenor, S, K, res.value, res.stderr, iv))
    _emit(Table(("id", "expiry", "tenor", "forward", "strike", "price", "stderr", "black_vol"), tuple(rows)), args.out)
    return 0


def cmd_price_cms(args, parser) -> int:
    cs = _curves(args.curves)
    single = _single_curves(args)
    mode = CmsMode(_opt(args, "mode", "multi").upper())
    if args.quotes:
        specs = load_quotes(args.quotes).cms_specs()
    else:
        if args.maturity is None or args.index is None:
            parser.error("give --quotes or both --maturity and --index")
        ft = _opt(args, "float_tenor", Tenor.M3)
        n = int(round(args.maturity * 360 / ft.days))
        specs = [CmsSwapSpec(n, args.index, ft.year_fraction, ft, id="cli")]
    method = _opt(args, "method", "replication")
    rows = []
    if method == "replication":
        if not args.sabr:
            parser.error("replication pricing needs --sabr")
        surface = load_artifact(args.sabr, SABR_SCHEMA)
        for s in specs:
            rows.append((s.id, s.maturity, s.c, None if s.quote is None else s.quote * BP,
                         cms_fair_spread(cs, surface, s, mode, single) * BP, 0.0))
    else:
        if not args.model:
            parser.error(f"--method {method} needs --model")
        model = load_artifact(args.model, MMG_SCHEMA)
        pm = PricingMethod.MC if method == "mmg-mc" else PricingMethod.QUADRATURE
        config = _mc_config(args)
        for s in specs:
            res = cms_spread_mmg(model, s, pm, config)
            rows.append((s.id, s.maturity, s.c, None if s.quote is None else s.quote * BP, res.value * BP, res.stderr * BP))
    _emit(Table(("id", "maturity", "index_tenor", "market_bp", "model_bp", "stderr_bp"), tuple(rows)), args.out)
    return 0


def cmd_price_spread_option(args, parser) -> int:
    cs = _mode_curves(args)
    surface = load_artifact(args.sabr, SABR_SCHEMA)
    variant = SpreadVariant.parse(_opt(args, "variant", "printed"))
    if args.quotes:
        specs = load_quotes(args.quotes).spread_option_specs()
        if args.rho is None:
            priced = [s for s in specs if s.price is not None]
            if not priced:
                parser.error("--rho is required when the quotes carry no prices")
            rhos = calibrate_flat_correlation(priced, cs, surface, variant)
        else:
            rhos = None
    else:
        missing = [n for n in ("expiry", "tenor_b", "tenor_c", "strike", "rho") if getattr(args, n) is None]
        if missing:
            parser.error("give --quotes or all of " + ", ".join("--" + m.replace("_", "-") for m in missing))
        specs = [SpreadOptionSpec(args.expiry, args.tenor_b, args.tenor_c, args.strike, None, args.rho, "cli")]
        rhos = None
    rows = []
    for s in specs:
        rho = args.rho if args.rho is not None else rhos.get(round(s.strike, 12)) if rhos else s.rho
        if rho is None:
            raise InputError(f"spread option {s.id}: no correlation available")
        value = spread_option_price(cs, surface, s, variant, rho)
        rows.append((s.id, s.expiry, s.tenor_b, s.tenor_c, s.strike, s.price, value, rho))
    _emit(Table(("id", "expiry", "tenor_b", "tenor_c", "strike", "market", "model", "rho"), tuple(rows)), args.out)
    return 0


def cmd_calibrate_sabr(args, parser) -> int:
    cs = _curves(args.curves)
    single = _single_curves(args)
    quotes = load_quotes(args.quotes)
    cms = () if args.no_cms else quotes.cms_specs()
    opts = LmOptions(max_iterations=_opt(args, "max_iterations", 200))
    res = calibrate_sabr_surface(quotes.swaption_quotes(), cs, CmsMode(_opt(args, "mode", "multi").upper()), cms,
                                 args.beta, _opt(args, "cms_weight", 1.0), single, opts)
    persist(res.surface, args.out)
    log.info("SABR fit: rmse %.4g vol bp, %.4g CMS bp", res.rmse_vol_bp, res.rmse_cms_bp)
    if args.report:
        persist(res, args.report)
    return 0


def _close_to_any(x: float, values) -> bool:
    return any(abs(x - v) < 1e-9 for v in values)


def cmd_calibrate_mmg(args, parser) -> int:
    cs = _mode_curves(args)
    quotes = load_quotes(args.quotes)
    swaptions = quotes.swaption_quotes()
    if args.expiries:
        swaptions = [q for q in swaptions if _close_to_any(q.expiry, args.expiries)]
    if args.tenors:
        swaptions = [q for q in swaptions if _close_to_any(q.tenor, args.tenors)]
    cms = quotes.cms_specs() if args.with_cms else ()
    if not swaptions and not cms:
        raise InputError("no calibration targets left after filtering")
    structure = MmgStructure(_opt(args, "scenarios", 2), _opt(args, "factors", 2))
    opts = LmOptions(max_iterations=_opt(args, "max_iterations", 100))
    log.info("calibrating %d-scenario %d-factor mixture to %d swaptions and %d CMS spreads",
             structure.scenarios, structure.factors, len(swaptions), len(cms))
    res = calibrate_mmg(swaptions, cs, structure, cms, _opt(args, "cms_weight", 1.0), options=opts)
    persist(res.model, args.out)
    log.info("MMG fit: rmse %.4g bp after %d iterations (%s)", res.rmse_bp, res.report.iterations, res.report.reason)
    if args.report:
        persist(res, args.report)
    return 0


def cmd_simulate(args, parser) -> int:
    model = load_artifact(args.model, MMG_SCHEMA)
    times = parse_grid(args.grid)
    config = _mc_config(args)
    ens = simulate_paths(model, times, config)
    curve = np.asarray(model.curves.df(ens.times), float)
    rows = []
    for j, t in enumerate(ens.times):
        mean, se = mc_mean(ens.discount[:, j], ens.antithetic)
        z = (mean - curve[j]) / se if se > 0 else 0.0
        rows.append((float(t), float(curve[j]), mean, se, z))
    _emit(Table(("time", "curve_discount", "mc_discount", "stderr", "z_score"), tuple(rows)), args.out)
    if args.paths_out:
        header = ("path", "scenario") + tuple(f"D({t!r})" for t in map(float, ens.times))
        prow = tuple((i, int(ens.scenario[i]), *map(float, ens.discount[i])) for i in range(ens.discount.shape[0]))
        _emit(Table(header, prow), args.paths_out)
    log.info("simulated %d paths on %d dates", config.paths, len(ens.times))
    return 0


def cmd_report(args, parser) -> int:
    quotes = load_quotes(args.quotes) if args.quotes else None
    curves = _curves(args.curves) if args.curves else None
    single = _curves(args.single_curves) if args.single_curves else None
    surface = load_artifact(args.sabr, SABR_SCHEMA) if args.sabr else None
    calibration = load_artifact(args.calibration) if args.calibration else None
    table = report_figures(args.figure, args.out, quotes=quotes, curves=curves, single6m=single, surface=surface,
                           calibration=calibration, mode=CmsMode(_opt(args, "mode", "multi").upper()))
    log.info("wrote %s (%d rows)", args.out, len(table.rows))
    return 0


HANDLERS = {
    "scenario": cmd_scenario,
    "bootstrap": cmd_bootstrap,
    "price irs": cmd_price_linear,
    "price basis": cmd_price_linear,
    "price fra": cmd_price_linear,
    "price swaption": cmd_price_swaption,
    "price cms": cmd_price_cms,
    "price cms-spread-option": cmd_price_spread_option,
    "calibrate sabr": cmd_calibrate_sabr,
    "calibrate mmg": cmd_calibrate_mmg,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def _configure_logging(verbosity: int) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("multicurve")
    root.handlers[:] = [handler]
    root.propagate = False
    root.setLevel(logging.DEBUG if verbosity > 1 else logging.INFO if verbosity == 1 else logging.WARNING)


def _log_warning(message, category, filename, lineno, file=None, line=None):
    log.warning("%s: %s", category.__name__, message)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Execute one command line; returns the process exit code."""
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        warnings.showwarning = _log_warning
        return _run(argv)


def _run(argv: Optional[Sequence[str]]) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        _configure_logging(args.verbose)
        if args.verb is None:
            parser.error("a verb is required")
        if args.verb in ("price", "calibrate") and args.sub is None:
            _subparser(parser, [args.verb]).error("choose what to " + args.verb)
        config_path = args.config or os.environ.get(CONFIG_ENV)
        if config_path:
            args = _apply_config(parser, args, load_config(config_path))
        command = _command(args)
        sub = _subparser(parser, command.split())
        missing = [n for n in REQUIRED[command] if getattr(args, n, None) is None]
        if missing:
            sub.error("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
        return HANDLERS[command](args, sub)
    except UsageError as exc:
        sys.stderr.write(exc.usage)
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return 2
    except (MulticurveError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
