"""Vectorised adaptive Gauss-Legendre quadrature and cached Gauss-Hermite rules."""

from __future__ import annotations

import functools

import numpy as np

from .errors import NumericalError


@functools.lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


@functools.lru_cache(maxsize=None)
def gauss_hermite_prob(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the standard normal density (weights sum to one)."""
    x, w = np.polynomial.hermite_e.hermegauss(n)
    return x, w / np.sqrt(2.0 * np.pi)


def _panels(f, owner: np.ndarray, a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    pts = 0.5 * (a + b)[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(np.repeat(owner, n), pts.ravel()), float).reshape(pts.shape)
    return half * (vals @ w)


def adaptive_gauss_legendre_batch(
    f,
    breakpoints,
    rtol: float = 1e-8,
    atol=1e-14,
    order: int = 20,
    max_panels: int = 4000,
    initial_panels: int = 4,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate many integrands at once, each over its own row of ``breakpoints``.

    ``f(item, x)`` evaluates integrand ``item[j]`` at ``x[j]``. Every panel is
    accepted once its ``order``-point estimate agrees with the sum over its two
    halves, against a tolerance ``max(atol, rtol * |integral|)`` shared out in
    proportion to panel width. Returns the integrals and summed error
    estimates; raises NumericalError when an integrand uses more than
    ``max_panels`` panels.
    """
    bp = np.atleast_2d(np.asarray(breakpoints, float))
    m = bp.shape[0]
    atol = np.broadcast_to(np.asarray(atol, float), (m,))
    frac = np.linspace(0.0, 1.0, initial_panels + 1)
    lo, hi = bp[:, :-1, None], bp[:, 1:, None]
    a = (lo + (hi - lo) * frac[:-1]).reshape(m, -1)
    b = (lo + (hi - lo) * frac[1:]).reshape(m, -1)
    owner = np.repeat(np.arange(m), a.shape[1])
    a, b = a.ravel(), b.ravel()
    live = b > a
    owner, a, b = owner[live], a[live], b[live]
    vals = np.zeros(m)
    errs = np.zeros(m)
    if a.size == 0:
        return vals, errs
    width = np.bincount(owner, weights=b - a, minlength=m)
    used = np.bincount(owner, minlength=m)
    coarse = _panels(f, owner, a, b, order)
    while a.size:
        mid = 0.5 * (a + b)
        left = _panels(f, owner, a, mid, order)
        right = _panels(f, owner, mid, b, order)
        fine = left + right
        err = np.abs(fine - coarse)
        scale = np.maximum(np.abs(vals + np.bincount(owner, weights=fine, minlength=m)), 1e-300)
        allow = np.maximum(atol[owner], rtol * scale[owner]) * (b - a) / width[owner]
        ok = err <= allow
        vals += np.bincount(owner[ok], weights=fine[ok], minlength=m)
        errs += np.bincount(owner[ok], weights=err[ok], minlength=m)
        bad = ~ok
        used += 2 * np.bincount(owner[bad], minlength=m)
        over = np.unique(owner[bad][used[owner[bad]] > max_panels])
        if over.size:
            i = int(over[0])
            est = errs[i] + float(np.sum(err[bad & (owner == i)]))
            raise NumericalError(f"quadrature did not converge (error estimate {est:.3e})")
        owner = np.concatenate([owner[bad], owner[bad]])
        a, b = np.concatenate([a[bad], mid[bad]]), np.concatenate([mid[bad], b[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
    return vals, errs


def adaptive_gauss_legendre(
    f,
    breakpoints,
    rtol: float = 1e-8,
    atol: float = 1e-14,
    order: int = 20,
    max_panels: int = 4000,
    initial_panels: int = 4,
) -> tuple[float, float]:
    """Integrate a vectorised ``f`` over consecutive ``breakpoints``.

    Returns the integral and its error estimate; see
    :func:`adaptive_gauss_legendre_batch` for the refinement rule.
    """
    vals, errs = adaptive_gauss_legendre_batch(lambda _, x: f(x), [breakpoints], rtol, atol, order,
                                               max_panels, initial_panels)
    return float(vals[0]), float(errs[0])
