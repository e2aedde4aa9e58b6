"""Least-squares calibration of SABR surfaces and Gaussian mixture models."""

from __future__ import annotations

from .levmar import (
    Bound,
    CalibrationProblem,
    CalibrationReport,
    LmOptions,
    ParameterMap,
    interval,
    levenberg_marquardt,
    positive,
)
from .mmg_fit import MmgCalibration, MmgStructure, TargetRow, calibrate_mmg
from .sabr import SurfaceCalibration, calibrate_sabr_slice, calibrate_sabr_surface

__all__ = [
    "Bound",
    "CalibrationProblem",
    "CalibrationReport",
    "LmOptions",
    "MmgCalibration",
    "MmgStructure",
    "ParameterMap",
    "SurfaceCalibration",
    "TargetRow",
    "calibrate_mmg",
    "calibrate_sabr_slice",
    "calibrate_sabr_surface",
    "interval",
    "levenberg_marquardt",
    "positive",
]
