"""Monte Carlo simulation of the mixture model.

Each path draws its scenario once, then samples the factors and their time
integrals exactly over every step (the pair is jointly Gaussian given the
previous state), so no discretisation bias enters. Paths are generated in
fixed-size blocks, each with its own seed derived from the master seed and the
block index; the output is therefore identical whatever the thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..curves import discount_factor
from ..errors import InputError
from .model import MmgModel, MmgScenario, bond_b, total_variance

MIN_PATHS = 2


@dataclass(frozen=True)
class McConfig:
    paths: int = 20000
    seed: int = 20100614
    antithetic: bool = True
    threads: int = 1
    block_size: int = 8192

    def __post_init__(self):
        if self.paths < MIN_PATHS:
            raise InputError(f"Monte Carlo needs at least {MIN_PATHS} paths")
        if self.antithetic and (self.paths % 2 or self.block_size % 2):
            raise InputError("antithetic sampling needs an even path count and block size")
        if self.threads < 1 or self.block_size < 2:
            raise InputError("threads and block_size must be positive")


@dataclass(frozen=True)
class PathEnsemble:
    """Factor states ``x``, their integrals ``y`` and discount factors on ``times``.

    Arrays are indexed (path, time[, factor]); factors beyond a scenario's own
    count are zero. With antithetic sampling paths 2m and 2m+1 are mirror images.
    """

    times: np.ndarray
    scenario: np.ndarray
    x: np.ndarray
    y: np.ndarray
    discount: np.ndarray
    antithetic: bool

    @property
    def paths(self) -> int:
        return self.scenario.size


def step_covariance(a: np.ndarray, sigma: np.ndarray, corr: np.ndarray, dt: float) -> np.ndarray:
    """Covariance of the (factor, factor-integral) innovations over a step with constant vols."""
    ak = a[:, None]
    ah = a[None, :]
    ss = corr * np.outer(sigma, sigma)
    e_k = -np.expm1(-ak * dt) / ak
    e_h = -np.expm1(-ah * dt) / ah
    e_kh = -np.expm1(-(ak + ah) * dt) / (ak + ah)
    cxx = ss * e_kh
    cxy = ss * (e_k - e_kh) / ah
    cyy = ss * (dt - e_k - e_h + e_kh) / (ak * ah)
    return np.block([[cxx, cxy], [cxy.T, cyy]])


def _sqrt_psd(c: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (c + c.T))
    return v * np.sqrt(np.clip(w, 0.0, None))


def _grid(model: MmgModel, times: np.ndarray) -> np.ndarray:
    pts = {0.0, *map(float, times)}
    horizon = float(times.max()) if times.size else 0.0
    for scn in model.scenarios:
        pts.update(float(v) for v in scn.vol_times if 0.0 < v < horizon)
    return np.array(sorted(pts))


def _scenario_steps(scn: MmgScenario, grid: np.ndarray, q_max: int):
    """Per-step decay, bond factor and innovation root for one scenario."""
    a = scn.a_arr
    dts = np.diff(grid)
    decay = np.exp(-a[None, :] * dts[:, None])
    bfac = bond_b(a[None, :], dts[:, None])
    roots = np.zeros((dts.size, 2 * scn.q, 2 * q_max))
    for j, (t0, dt) in enumerate(zip(grid[:-1], dts)):
        roots[j, :, : 2 * scn.q] = _sqrt_psd(step_covariance(a, scn.sigma_at(t0), scn.corr_arr, dt))
    return decay, bfac, roots


def _simulate_block(model, grid, steps, keep, n, block, config):
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(block,)))
    q_max = model.q_max
    n_base = n // 2 if config.antithetic else n
    u = rng.random(n_base)
    z = rng.standard_normal((n_base, grid.size - 1, 2 * q_max))
    if config.antithetic:
        u = np.repeat(u, 2)
        z = np.stack([z, -z], axis=1).reshape(n, grid.size - 1, 2 * q_max)
    cum = np.cumsum(model.weights)
    scen = np.minimum(np.searchsorted(cum, u, side="right"), len(model.scenarios) - 1)
    x_out = np.zeros((n, keep.size, q_max))
    y_out = np.zeros((n, keep.size, q_max))
    for i, scn in enumerate(model.scenarios):
        idx = np.nonzero(scen == i)[0]
        if idx.size == 0:
            continue
        q = scn.q
        decay, bfac, roots = steps[i]
        x = np.zeros((idx.size, q))
        y = np.zeros((idx.size, q))
        zi = z[idx]
        col = 0
        if keep[0] == 0:
            col = 1
        for j in range(grid.size - 1):
            inc = zi[:, j, :] @ roots[j].T
            y = y + bfac[j] * x + inc[:, q:]
            x = decay[j] * x + inc[:, :q]
            if col < keep.size and keep[col] == j + 1:
                x_out[idx, col, :q] = x
                y_out[idx, col, :q] = y
                col += 1
    return scen, x_out, y_out


def simulate_paths(model: MmgModel, times, config: McConfig = McConfig()) -> PathEnsemble:
    times = np.unique(np.asarray(times, float))
    if times.size == 0 or times[0] < 0:
        raise InputError("simulate_paths: need non-negative output times")
    grid = _grid(model, times)
    keep = np.searchsorted(grid, times)
    q_max = model.q_max
    steps = [_scenario_steps(s, grid, q_max) for s in model.scenarios]
    sizes = [min(config.block_size, config.paths - s) for s in range(0, config.paths, config.block_size)]

    def run(b):
        return _simulate_block(model, grid, steps, keep, sizes[b], b, config)

    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    scen = np.concatenate([p[0] for p in parts])
    x = np.concatenate([p[1] for p in parts])
    y = np.concatenate([p[2] for p in parts])
    p0 = np.asarray(discount_factor(model.curves.discount, times), float)
    half_var = np.array([[0.5 * total_variance(s, t) for t in times] for s in model.scenarios])
    discount = p0[None, :] * np.exp(-half_var[scen] - y.sum(axis=2))
    return PathEnsemble(times, scen, x, y, discount, config.antithetic)


def mc_mean(values: np.ndarray, antithetic: bool) -> tuple[float, float]:
    """Sample mean and its standard error (pairs averaged first when antithetic)."""
    v = np.asarray(values, float)
    if antithetic:
        v = v.reshape(-1, 2).mean(axis=1)
    if v.size < 2:
        return float(v.mean()), float("nan")
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size))


def mc_zcb(model: MmgModel, T: float, config: McConfig = McConfig()) -> tuple[float, float]:
    """Monte Carlo average of the discount factor to T and its standard error."""
    ens = simulate_paths(model, [T], config)
    return mc_mean(ens.discount[:, -1], ens.antithetic)


__all__ = ["McConfig", "PathEnsemble", "mc_mean", "mc_zcb", "simulate_paths", "step_covariance"]
