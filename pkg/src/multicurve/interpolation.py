"""Monotone cubic Hermite interpolation.

Slopes start from three-point (parabolic) finite differences and are then
limited with the Fritsch-Carlson filter, so the interpolant is monotone on every
interval where the data are monotone and C1 everywhere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


class Extrapolation(str, enum.Enum):
    FLAT = "FLAT"
    LINEAR = "LINEAR"


def _initial_slopes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    h = np.diff(x)
    d = np.diff(y) / h
    n = len(x)
    m = np.empty(n)
    if n == 2:
        m[:] = d[0]
        return m
    m[1:-1] = (h[1:] * d[:-1] + h[:-1] * d[1:]) / (h[:-1] + h[1:])
    # one-sided parabolic slopes at the ends
    m[0] = ((2 * h[0] + h[1]) * d[0] - h[0] * d[1]) / (h[0] + h[1])
    m[-1] = ((2 * h[-1] + h[-2]) * d[-1] - h[-1] * d[-2]) / (h[-1] + h[-2])
    return m


def _limit_slopes(x: np.ndarray, y: np.ndarray, m: np.ndarray) -> np.ndarray:
    d = np.diff(y) / np.diff(x)
    left = np.concatenate([d[:1], d])
    right = np.concatenate([d, d[-1:]])
    # slope must vanish at local extrema and share the sign of adjacent secants
    m = np.where((left * right <= 0.0) | (m * left <= 0.0), 0.0, m)
    m = m.tolist()
    for k, dk in enumerate(d.tolist()):
        if dk == 0.0:
            m[k] = m[k + 1] = 0.0
            continue
        a = m[k] / dk
        b = m[k + 1] / dk
        s = a * a + b * b
        if s > 9.0:
            tau = 3.0 / math.sqrt(s)
            m[k] = tau * a * dk
            m[k + 1] = tau * b * dk
    m = np.array(m)
    return m


@dataclass(frozen=True)
class InterpCurve:
    """Piecewise cubic through (x, y) with slopes ``slopes``.

    Each piece is stored as a power series in the distance from its left knot,
    with one extra piece on each side for extrapolation.
    """

    x: np.ndarray
    y: np.ndarray
    slopes: np.ndarray
    extrapolation: Extrapolation = Extrapolation.FLAT
    _base: np.ndarray = field(init=False, repr=False, compare=False)
    _coef: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        x, y, m = self.x, self.y, self.slopes
        n = len(x)
        coef = np.zeros((4, n + 1))
        tail = 1.0 if Extrapolation(self.extrapolation) is Extrapolation.LINEAR else 0.0
        coef[0, 0], coef[1, 0] = y[0], tail * m[0]
        coef[0, n], coef[1, n] = y[-1], tail * m[-1]
        if n > 1:
            h = np.diff(x)
            d = np.diff(y) / h
            coef[0, 1:n] = y[:-1]
            coef[1, 1:n] = m[:-1]
            coef[2, 1:n] = (3.0 * d - 2.0 * m[:-1] - m[1:]) / h
            coef[3, 1:n] = (m[:-1] + m[1:] - 2.0 * d) / (h * h)
        object.__setattr__(self, "_base", np.concatenate([x[:1], x]))
        object.__setattr__(self, "_coef", coef)

    @property
    def knots(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    def __call__(self, t):
        return self.eval(t)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        j = np.searchsorted(self.x, t, side="right")
        d = t - self._base[j]
        c = self._coef
        out = ((c[3, j] * d + c[2, j]) * d + c[1, j]) * d + c[0, j]
        return float(out) if out.ndim == 0 else out

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        j = np.searchsorted(self.x, t, side="right")
        d = t - self._base[j]
        c = self._coef
        out = (3.0 * c[3, j] * d + 2.0 * c[2, j]) * d + c[1, j]
        return float(out) if out.ndim == 0 else out


def hermite_curve(points, extrapolation: Extrapolation | str = Extrapolation.FLAT) -> InterpCurve:
    """Like :func:`fit_monotone_hermite` but a single point gives a constant curve.

    Bootstraps need the one-knot case while only their first pillar is solved.
    """
    pts = np.asarray(points if isinstance(points, np.ndarray) else list(points), dtype=float)
    if pts.size == 0:
        raise InputError("need at least one point to interpolate")
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InputError("interpolation points must be (x, y) pairs")
    x = pts[:, 0].copy()
    y = pts[:, 1].copy()
    if not np.isfinite(pts).all():
        raise InputError("interpolation points must be finite")
    if len(x) > 1 and (x[1:] <= x[:-1]).any():
        raise InputError("interpolation abscissae must be strictly increasing (duplicate or unsorted x)")
    extrapolation = Extrapolation(extrapolation)
    if len(x) == 1:
        return InterpCurve(x, y, np.zeros(1), extrapolation)
    m = _limit_slopes(x, y, _initial_slopes(x, y))
    return InterpCurve(x, y, m, extrapolation)


def fit_monotone_hermite(points, extrapolation: Extrapolation | str = Extrapolation.FLAT) -> InterpCurve:
    """Fit a monotone Hermite interpolant through ``points`` = [(x, y), ...]."""
    points = list(points)
    if len(points) < 2:
        raise InputError("monotone Hermite interpolation needs at least two points")
    return hermite_curve(points, extrapolation)
