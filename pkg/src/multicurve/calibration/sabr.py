"""SABR surface calibration to swaption smiles and, optionally, CMS spreads."""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from ..cms import CmsMode, CmsSwapSpec, PreparedCms
from ..curves import CurveSet
from ..errors import CalibrationWarning, InputError
from ..volmodels import SabrSlice, SabrSurface, SwaptionQuote, forward_swap_rate, sabr_implied_vol
from .levmar import CalibrationProblem, CalibrationReport, LmOptions, ParameterMap, interval, levenberg_marquardt, positive

DEFAULT_BETA = 0.5
BP = 1e4


@dataclass(frozen=True)
class SurfaceCalibration:
    surface: SabrSurface
    reports: Mapping[str, CalibrationReport]
    rmse_vol_bp: float
    rmse_cms_bp: float = float("nan")

    def to_dict(self) -> dict:
        return {"rmse_vol_bp": self.rmse_vol_bp, "rmse_cms_bp": self.rmse_cms_bp,
                "fits": {k: r.to_dict() for k, r in self.reports.items()}}


def _curves_for(cs: CurveSet, mode: CmsMode, single: Optional[CurveSet]) -> CurveSet:
    if mode is CmsMode.MULTI:
        return cs
    return single if single is not None else cs.single()


def _cell_start(quotes: Sequence[SwaptionQuote], S: float, beta: float) -> tuple[float, float, float]:
    atm = min(quotes, key=lambda q: abs(q.strike_for(S) - S))
    return atm.vol * S ** (1.0 - beta), 0.0, 0.3


def calibrate_sabr_surface(
    swaptions: Sequence[SwaptionQuote],
    cs: CurveSet,
    mode=CmsMode.MULTI,
    cms: Sequence[CmsSwapSpec] = (),
    beta: float | Mapping[float, float] | None = None,
    cms_weight: float = 1.0,
    single: Optional[CurveSet] = None,
    options: LmOptions = LmOptions(),
) -> SurfaceCalibration:
    """Fit (alpha, rho, epsilon) per (expiry, tenor) cell with beta shared within a tenor.

    Smile residuals are in vol bp and CMS residuals in spread bp times
    ``cms_weight``. Beta is fitted only for tenors with CMS quotes; elsewhere it
    is held at ``beta`` (default 0.5, with a warning that it is not identified).
    """
    mode = mode if isinstance(mode, CmsMode) else CmsMode(str(mode).upper())
    curves = _curves_for(cs, mode, single)
    cells: dict[tuple[float, float], list[SwaptionQuote]] = defaultdict(list)
    for q in swaptions:
        cells[(q.expiry, q.tenor)].append(q)
    for key, qs in cells.items():
        if len(qs) < 3:
            raise InputError(f"SABR cell {key[0]:g}y x {key[1]:g}y needs at least 3 smile points, got {len(qs)}")
    fwd = {k: forward_swap_rate(curves, k[0], k[1], qs[0].float_tenor) for k, qs in cells.items()}
    slices: dict[tuple[float, float], SabrSlice] = {}
    reports: dict[str, CalibrationReport] = {}
    vol_res: list[float] = []
    cms_res: list[float] = []
    tenors = sorted({k[1] for k in cells})
    for tenor in tenors:
        keys = sorted(k for k in cells if math.isclose(k[1], tenor))
        specs = [s for s in cms if s.quote is not None and math.isclose(s.c, tenor)]
        fixed_beta = beta.get(tenor) if isinstance(beta, Mapping) else beta
        fit_beta = bool(specs) and fixed_beta is None
        if fixed_beta is None and not fit_beta:
            warnings.warn(f"beta for {tenor:g}y swaps is not identified by smiles alone; fixed at {DEFAULT_BETA}",
                          CalibrationWarning, stacklevel=2)
            fixed_beta = DEFAULT_BETA
        b0 = DEFAULT_BETA if fit_beta else float(fixed_beta)
        strikes = {k: np.array([q.strike_for(fwd[k]) for q in cells[k]]) for k in keys}
        vols = {k: np.array([q.vol for q in cells[k]]) for k in keys}

        def build(p, keys=keys):
            b = p[0] if fit_beta else b0
            off = 1 if fit_beta else 0
            return {k: SabrSlice(p[off + 3 * j], b, p[off + 3 * j + 1], p[off + 3 * j + 2], k[0], k[1])
                    for j, k in enumerate(keys)}

        def vol_residuals(sl, keys=keys, strikes=strikes, vols=vols):
            return np.concatenate([(sabr_implied_vol(sl[k], fwd[k], strikes[k], k[0]) - vols[k]) * BP for k in keys])

        prepared = [PreparedCms.build(cs, s, mode, single) for s in specs]

        def cms_residuals(sl, prepared=prepared):
            if not prepared:
                return np.zeros(0)
            surf = SabrSurface({**slices, **sl})
            return np.array([(p.spread(surf) - p.spec.quote) * BP * cms_weight for p in prepared])

        if not fit_beta:
            # cells decouple: fit each on its own
            for j, k in enumerate(keys):
                x0 = _cell_start(cells[k], fwd[k], b0)
                pm = ParameterMap((positive(), interval(-1.0, 1.0), positive()))

                def res(p, k=k):
                    return (sabr_implied_vol(SabrSlice(p[0], b0, p[1], p[2]), fwd[k], strikes[k], k[0]) - vols[k]) * BP

                rep = levenberg_marquardt(CalibrationProblem(res, x0, pm, names=(
                    f"alpha[{k[0]:g}]", f"rho[{k[0]:g}]", f"eps[{k[0]:g}]")), options)
                slices[k] = SabrSlice(rep.params[0], b0, rep.params[1], rep.params[2], k[0], k[1])
                reports[f"{k[0]:g}x{tenor:g}"] = rep
                vol_res.extend(rep.residuals)
            continue
        x0, bounds, names = [b0], [interval(0.0, 1.0)], [f"beta[{tenor:g}]"]
        for k in keys:
            x0.extend(_cell_start(cells[k], fwd[k], b0))
            bounds.extend((positive(), interval(-1.0, 1.0), positive()))
            names.extend((f"alpha[{k[0]:g}]", f"rho[{k[0]:g}]", f"eps[{k[0]:g}]"))

        def res(p, build=build, vol_residuals=vol_residuals, cms_residuals=cms_residuals):
            sl = build(p)
            return np.concatenate([vol_residuals(sl), cms_residuals(sl)])

        rep = levenberg_marquardt(CalibrationProblem(res, x0, ParameterMap(tuple(bounds)), names=names), options)
        slices.update(build(rep.params))
        reports[f"{tenor:g}"] = rep
        n_vol = sum(len(cells[k]) for k in keys)
        vol_res.extend(rep.residuals[:n_vol])
        cms_res.extend(rep.residuals[n_vol:] / cms_weight if cms_weight else rep.residuals[n_vol:])
    surface = SabrSurface(slices)
    rmse_v = float(np.sqrt(np.mean(np.square(vol_res)))) if vol_res else float("nan")
    rmse_c = float(np.sqrt(np.mean(np.square(cms_res)))) if cms_res else float("nan")
    return SurfaceCalibration(surface, reports, rmse_v, rmse_c)


def calibrate_sabr_slice(strikes, vols, forward: float, expiry: float, beta: float = DEFAULT_BETA,
                         x0: Optional[Sequence[float]] = None, options: LmOptions = LmOptions()) -> tuple[SabrSlice, CalibrationReport]:
    """Fit (alpha, rho, epsilon) at fixed beta to one smile."""
    strikes = np.asarray(strikes, float)
    vols = np.asarray(vols, float)
    if strikes.size < 3:
        raise InputError("a SABR smile fit needs at least 3 points")
    if x0 is None:
        atm = int(np.argmin(np.abs(strikes - forward)))
        x0 = (vols[atm] * forward ** (1.0 - beta), 0.0, 0.3)
    pm = ParameterMap((positive(), interval(-1.0, 1.0), positive()))

    def res(p):
        return (sabr_implied_vol(SabrSlice(p[0], beta, p[1], p[2]), forward, strikes, expiry) - vols) * BP

    rep = levenberg_marquardt(CalibrationProblem(res, x0, pm, names=("alpha", "rho", "epsilon")), options)
    return SabrSlice(rep.params[0], beta, rep.params[1], rep.params[2], expiry), rep


__all__ = ["DEFAULT_BETA", "SurfaceCalibration", "calibrate_sabr_slice", "calibrate_sabr_surface"]
