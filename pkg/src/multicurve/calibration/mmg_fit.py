"""Calibration of the Gaussian mixture model to swaption prices and CMS spreads.

Each scenario carries mean reversions, flat volatilities and (for two factors)
a correlation; the scenario weights live on the simplex. Swaption residuals are
model minus market price in bp of notional, CMS residuals model minus quoted
spread in bp. The default start breaks the symmetry between scenarios and
between factors, since a symmetric start has a gradient that never separates
them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..cms import CmsSwapSpec
from ..curves import CurveSet
from ..errors import ConfigurationError, NumericalError
from ..mmg.model import MmgModel, MmgScenario
from ..mmg.pricing import PreparedSwaption, PricingMethod, cms_spread_mmg, price_prepared
from ..volmodels import SwaptionQuote, annuity, black_implied_vol, swaption_price
from .levmar import CalibrationProblem, CalibrationReport, LmOptions, ParameterMap, interval, levenberg_marquardt, positive

BP = 1e4
A_BOUNDS = (1e-4, 3.0)


@dataclass(frozen=True)
class MmgStructure:
    scenarios: int = 2
    factors: int = 2

    def __post_init__(self):
        if self.scenarios < 1 or not 1 <= self.factors <= 2:
            raise ConfigurationError("MMG calibration supports one or more scenarios of one or two factors")

    @property
    def per_scenario(self) -> int:
        q = self.factors
        return 2 * q + (1 if q == 2 else 0)

    @property
    def size(self) -> int:
        return self.scenarios * self.per_scenario + (self.scenarios if self.scenarios > 1 else 0)

    def names(self) -> list[str]:
        out = []
        for i in range(self.scenarios):
            out += [f"a{k + 1}[{i}]" for k in range(self.factors)]
            out += [f"sigma{k + 1}[{i}]" for k in range(self.factors)]
            if self.factors == 2:
                out.append(f"rho[{i}]")
        if self.scenarios > 1:
            out += [f"w[{i}]" for i in range(self.scenarios)]
        return out

    def parameter_map(self) -> ParameterMap:
        bounds = []
        for _ in range(self.scenarios):
            bounds += [interval(*A_BOUNDS)] * self.factors + [positive()] * self.factors
            if self.factors == 2:
                bounds.append(interval(-1.0, 1.0))
        groups = ()
        if self.scenarios > 1:
            n = len(bounds)
            bounds += [positive()] * self.scenarios
            groups = (tuple(range(n, n + self.scenarios)),)
        return ParameterMap(tuple(bounds), groups)

    def initial(self) -> np.ndarray:
        """a = 5% (then 15%), sigma = 1% scaled per scenario, zero correlation, equal weights."""
        m, q = self.scenarios, self.factors
        out = []
        for i in range(m):
            scale = 1.0 + (0.6 * (i - (m - 1) / 2.0) / max(m - 1, 1) if m > 1 else 0.0)
            out += [0.05 * 3.0 ** k for k in range(q)]
            out += [0.01 * scale] * q
            if q == 2:
                out.append(0.0)
        if m > 1:
            out += [1.0 / m] * m
        return np.asarray(out, float)

    def scenarios_from(self, p) -> tuple[MmgScenario, ...]:
        p = np.asarray(p, float)
        m, q, n = self.scenarios, self.factors, self.per_scenario
        weights = p[m * n:] if m > 1 else np.ones(1)
        weights = weights / weights.sum()
        out = []
        for i in range(m):
            blk = p[i * n: (i + 1) * n]
            a = tuple(float(v) for v in blk[:q])
            sig = tuple((float(v),) for v in blk[q: 2 * q])
            corr = ((1.0, float(blk[-1])), (float(blk[-1]), 1.0)) if q == 2 else ()
            out.append(MmgScenario(float(weights[i]), a, sig, corr))
        # keep the weights summing to one exactly
        total = sum(s.weight for s in out)
        if total != 1.0:
            last = out[-1]
            out[-1] = MmgScenario(1.0 - sum(s.weight for s in out[:-1]), last.a, last.sigma, last.corr, last.vol_times)
        return tuple(out)

    def params_from(self, scenarios: Sequence[MmgScenario]) -> np.ndarray:
        out = []
        for s in scenarios:
            if s.q != self.factors or len(s.vol_times) != 1:
                raise ConfigurationError("scenario does not match the calibration structure")
            out += list(s.a) + [r[0] for r in s.sigma]
            if s.q == 2:
                out.append(s.corr[0][1])
        if self.scenarios > 1:
            out += [s.weight for s in scenarios]
        return np.asarray(out, float)


@dataclass(frozen=True)
class TargetRow:
    id: str
    kind: str
    market: float
    model: float
    error_bp: float
    error_rel: float


@dataclass(frozen=True)
class MmgCalibration:
    model: MmgModel
    report: CalibrationReport
    targets: tuple[TargetRow, ...]

    @property
    def rmse_bp(self) -> float:
        return self.report.rmse

    def to_dict(self) -> dict:
        return {"report": self.report.to_dict(),
                "targets": [{"id": t.id, "kind": t.kind, "market": t.market, "model": t.model,
                             "error_bp": t.error_bp, "error_rel": t.error_rel} for t in self.targets]}


def _quote_id(q: SwaptionQuote) -> str:
    return q.id or f"{q.expiry:g}x{q.tenor:g}{q.strike_offset * BP:+.0f}"


def calibrate_mmg(
    swaptions: Sequence[SwaptionQuote],
    cs: CurveSet,
    structure: MmgStructure = MmgStructure(),
    cms: Sequence[CmsSwapSpec] = (),
    cms_weight: float = 1.0,
    x0: Optional[Sequence[float]] = None,
    options: LmOptions = LmOptions(max_iterations=100),
    market_prices: Optional[Sequence[float]] = None,
    n_inner: int = 32,
    n_outer: int = 16,
) -> MmgCalibration:
    """Least-squares fit of the mixture to swaption prices (and CMS spreads) on ``cs``.

    Market prices default to the quotes' Black values on the multi-curve set.
    """
    if not swaptions and not cms:
        raise ConfigurationError("MMG calibration needs at least one target")
    preps = [PreparedSwaption.build(cs, q) for q in swaptions]
    if market_prices is None:
        market_prices = [swaption_price(cs, q).value for q in swaptions]
    market = np.asarray(market_prices, float)
    cms_specs = [s for s in cms if s.quote is not None]
    cms_quotes = np.array([s.quote for s in cms_specs], float)

    def model_values(scns):
        sw = np.array([price_prepared(scns, p, n_inner, n_outer)[0] for p in preps])
        model = MmgModel(scns, cs)
        cm = np.array([cms_spread_mmg(model, s, PricingMethod.QUADRATURE).value for s in cms_specs])
        return sw, cm

    def residuals(p):
        try:
            # trial steps far out can overflow; the resulting non-finite residuals get rejected
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                sw, cm = model_values(structure.scenarios_from(p))
        except (NumericalError, ConfigurationError, FloatingPointError):
            return np.full(len(preps) + len(cms_specs), np.nan)
        return np.concatenate([(sw - market) * BP, (cm - cms_quotes) * BP * cms_weight])

    start = structure.initial() if x0 is None else np.asarray(x0, float)
    problem = CalibrationProblem(residuals, start, structure.parameter_map(), names=structure.names())
    report = levenberg_marquardt(problem, options)
    scns = structure.scenarios_from(report.params)
    model = MmgModel(scns, cs)
    sw, cm = model_values(scns)
    rows = []
    for q, prep, mkt, mod in zip(swaptions, preps, market, sw):
        ann = prep.discount * annuity(cs, q.expiry, q.fixed_schedule(), prep.forward, q.settlement)
        try:
            iv = black_implied_vol(mod / ann, prep.forward, prep.strike, q.expiry, call=q.payer)
        except NumericalError:
            iv = float("nan")
        rows.append(TargetRow(_quote_id(q), "swaption_vol", q.vol, iv, (iv - q.vol) * BP,
                              (iv - q.vol) / q.vol if q.vol else float("nan")))
    for s, mod in zip(cms_specs, cm):
        rows.append(TargetRow(s.id or f"cms{s.maturity:g}y{s.c:g}", "cms_spread", s.quote, float(mod),
                              (mod - s.quote) * BP, (mod - s.quote) / s.quote if s.quote else float("nan")))
    if len(preps) + len(cms_specs) == 0:
        raise ConfigurationError("no usable targets")
    return MmgCalibration(model, report, tuple(rows))


__all__ = ["MmgCalibration", "MmgStructure", "TargetRow", "calibrate_mmg"]
