"""Levenberg-Marquardt least squares with box constraints handled by reparameterisation.

The solver works on an unconstrained internal vector; each external parameter
is mapped through a transform (identity, shifted exponential, scaled logistic)
and groups of weights on a simplex through a softmax with the last logit fixed
at zero. Damping follows Nielsen's gain-ratio update with Marquardt's diagonal
scaling.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import CalibrationError, CalibrationWarning, ConfigurationError


class TransformKind(str, enum.Enum):
    FREE = "free"
    LOG = "log"
    LOGIT = "logit"


@dataclass(frozen=True)
class Bound:
    """Transform for one parameter: FREE, LOG (p > lo) or LOGIT (lo < p < hi)."""

    kind: TransformKind = TransformKind.FREE
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", TransformKind(self.kind))
        if self.kind is TransformKind.LOGIT and not self.hi > self.lo:
            raise ConfigurationError("logit bound needs lo < hi")

    def to_external(self, t: float) -> float:
        if self.kind is TransformKind.FREE:
            return t
        if self.kind is TransformKind.LOG:
            # far trial steps map to inf; their residuals are non-finite and get rejected
            with np.errstate(over="ignore"):
                return self.lo + float(np.exp(t))
        if t >= 0:
            s = 1.0 / (1.0 + np.exp(-t))
        else:
            e = np.exp(t)
            s = e / (1.0 + e)
        return self.lo + (self.hi - self.lo) * float(s)

    def to_internal(self, p: float) -> float:
        if self.kind is TransformKind.FREE:
            return p
        if self.kind is TransformKind.LOG:
            if not p > self.lo:
                raise ConfigurationError(f"value {p} outside ({self.lo}, inf)")
            return float(np.log(p - self.lo))
        if not self.lo < p < self.hi:
            raise ConfigurationError(f"value {p} outside ({self.lo}, {self.hi})")
        return float(np.log(p - self.lo) - np.log(self.hi - p))


def positive(lo: float = 0.0) -> Bound:
    return Bound(TransformKind.LOG, lo)


def interval(lo: float, hi: float) -> Bound:
    return Bound(TransformKind.LOGIT, lo, hi)


FREE = Bound()


@dataclass(frozen=True)
class ParameterMap:
    """External parameter layout: per-parameter bounds plus softmax simplex groups.

    Indices listed in a simplex group ignore their bound; a group of size m uses
    m - 1 internal coordinates.
    """

    bounds: tuple[Bound, ...]
    simplex_groups: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        seen = [i for g in self.simplex_groups for i in g]
        if len(seen) != len(set(seen)) or any(not 0 <= i < len(self.bounds) for i in seen):
            raise ConfigurationError("simplex groups must be disjoint valid indices")

    @property
    def size(self) -> int:
        return len(self.bounds)

    @property
    def internal_size(self) -> int:
        return self.size - len(self.simplex_groups)

    def _plain(self) -> list[int]:
        grouped = {i for g in self.simplex_groups for i in g}
        return [i for i in range(self.size) if i not in grouped]

    def to_external(self, theta) -> np.ndarray:
        theta = np.asarray(theta, float)
        p = np.empty(self.size)
        pos = 0
        for i in self._plain():
            p[i] = self.bounds[i].to_external(theta[pos])
            pos += 1
        for g in self.simplex_groups:
            z = np.concatenate([theta[pos: pos + len(g) - 1], [0.0]])
            pos += len(g) - 1
            e = np.exp(z - z.max())
            p[list(g)] = e / e.sum()
        return p

    def to_internal(self, p) -> np.ndarray:
        p = np.asarray(p, float)
        out = [self.bounds[i].to_internal(p[i]) for i in self._plain()]
        for g in self.simplex_groups:
            w = p[list(g)]
            if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ConfigurationError("simplex weights must be positive and sum to 1")
            out.extend(np.log(w[:-1]) - np.log(w[-1]))
        return np.asarray(out, float)


@dataclass
class CalibrationProblem:
    """residuals(p) -> vector (model minus market) on external parameters ``p``.

    ``jacobian`` optionally gives d residual / d internal parameter; otherwise
    forward differences with step 1e-7 * max(|theta|, 1) are used.
    """

    residuals: Callable[[np.ndarray], np.ndarray]
    x0: Sequence[float]
    params: Optional[ParameterMap] = None
    weights: Optional[Sequence[float]] = None
    names: Optional[Sequence[str]] = None
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, float)
        if self.params is None:
            self.params = ParameterMap(tuple(FREE for _ in self.x0))
        if self.params.size != self.x0.size:
            raise ConfigurationError("parameter map and initial point differ in size")
        if self.names is None:
            self.names = [f"p{i}" for i in range(self.x0.size)]


@dataclass(frozen=True)
class LmOptions:
    max_iterations: int = 200
    gradient_tol: float = 1e-10
    step_tol: float = 1e-12
    tau: float = 1e-6
    fd_step: float = 1e-7
    reduction_tol: float = 1e-15


@dataclass(frozen=True)
class CalibrationReport:
    params: np.ndarray
    residuals: np.ndarray
    rmse: float
    iterations: int
    converged: bool
    reason: str
    names: tuple[str, ...] = ()
    history: tuple[float, ...] = field(default=(), compare=False)
    evaluations: int = 0

    def to_dict(self) -> dict:
        return {"params": {n: float(v) for n, v in zip(self.names, self.params)},
                "residuals": [float(r) for r in self.residuals], "rmse": float(self.rmse),
                "iterations": self.iterations, "converged": self.converged, "reason": self.reason}


def _echo(names, p) -> str:
    return ", ".join(f"{n}={v:.10g}" for n, v in zip(names, p))


def levenberg_marquardt(problem: CalibrationProblem, options: LmOptions = LmOptions()) -> CalibrationReport:
    pmap = problem.params
    w = None if problem.weights is None else np.asarray(problem.weights, float)
    evals = 0

    def resid(theta):
        nonlocal evals
        evals += 1
        r = np.asarray(problem.residuals(pmap.to_external(theta)), float)
        return r if w is None else r * w

    theta = pmap.to_internal(problem.x0)
    r = resid(theta)
    if not np.all(np.isfinite(r)):
        raise CalibrationError("residuals are not finite at the initial point: " + _echo(problem.names, problem.x0))
    if r.size < theta.size:
        warnings.warn(f"{r.size} residuals for {theta.size} parameters: problem is underdetermined",
                      CalibrationWarning, stacklevel=2)

    def jac(theta, r):
        if problem.jacobian is not None:
            j = np.asarray(problem.jacobian(theta), float)
            return j if w is None else j * w[:, None]
        J = np.empty((r.size, theta.size))
        for k in range(theta.size):
            h = options.fd_step * max(abs(theta[k]), 1.0)
            t2 = theta.copy()
            t2[k] += h
            J[:, k] = (resid(t2) - r) / h
        return J

    J = jac(theta, r)
    A = J.T @ J
    g = J.T @ r
    cost = 0.5 * float(r @ r)
    mu = options.tau * max(float(np.max(np.diag(A))), 1e-300)
    nu = 2.0
    history = [cost]
    reason = "max_iterations"
    converged = False
    it = 0
    while it < options.max_iterations:
        if float(np.max(np.abs(g))) < options.gradient_tol:
            reason, converged = "gradient", True
            break
        it += 1
        D = np.maximum(np.diag(A), 1e-300)
        try:
            step = np.linalg.solve(A + mu * np.diag(D), -g)
        except np.linalg.LinAlgError:
            mu *= nu
            nu *= 2.0
            continue
        if np.linalg.norm(step) <= options.step_tol * (np.linalg.norm(theta) + options.step_tol):
            reason, converged = "step", True
            break
        predicted = 0.5 * float(step @ (mu * D * step - g))
        if predicted <= options.reduction_tol * cost:
            # the quadratic model promises less than rounding noise
            reason, converged = "reduction", True
            break
        trial = theta + step
        r_new = resid(trial)
        if not np.all(np.isfinite(r_new)):
            mu *= nu
            nu *= 2.0
            continue
        cost_new = 0.5 * float(r_new @ r_new)
        gain = (cost - cost_new) / predicted if predicted > 0 else -1.0
        if gain > 0:
            theta, r, cost = trial, r_new, cost_new
            J = jac(theta, r)
            A = J.T @ J
            g = J.T @ r
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * gain - 1.0) ** 3)
            nu = 2.0
            history.append(cost)
        else:
            mu *= nu
            nu *= 2.0
        if not np.isfinite(mu) or mu > 1e300:
            reason = "damping_overflow"
            break
    p = pmap.to_external(theta)
    raw = np.asarray(problem.residuals(p), float)
    rmse = float(np.sqrt(np.mean(raw ** 2))) if raw.size else 0.0
    return CalibrationReport(p, raw, rmse, it, converged, reason, tuple(problem.names), tuple(history), evals)


__all__ = [
    "Bound",
    "CalibrationProblem",
    "CalibrationReport",
    "FREE",
    "LmOptions",
    "ParameterMap",
    "TransformKind",
    "interval",
    "levenberg_marquardt",
    "positive",
]
