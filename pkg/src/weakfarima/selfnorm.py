"""Self-normalized confidence statements for the FARIMA least-squares estimator.

Instead of estimating the long-run variance of the score, the statistic is
normalized by a random matrix built from the score's own partial sums,

    P = (1/n^2) sum_t S_t S_t',   S_t = sum_{j<=t} (U_j - Ubar),
    U_j = -J^{-1} H_j,

whose limit is pivotal: n (theta_hat - theta0)' P^{-1} (theta_hat - theta0)
converges to U_m = B(1)' V_m^{-1} B(1) with B an m-dimensional Brownian motion
and V_m = int_0^1 (B(r) - r B(1)) (B(r) - r B(1))' dr. The critical values of
U_m carry no nuisance parameters, so they are simulated once by Monte Carlo
and cached on disk; no published table is copied.

Discretization: Euler increments N(0, 1/grid_steps); V_m by a midpoint
Riemann sum with the bridge evaluated at averages of adjacent grid values.
The O(1/grid_steps) bias is controlled by a grid-refinement check in the
acceptance suite.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .validation import check_alpha, check_positive_int

_CACHE_VERSION = 1


@dataclass(frozen=True)
class QuantileMC:
    """Monte Carlo configuration for the U_m critical values; part of the cache key."""

    num_paths: int = 50_000
    grid_steps: int = 2_000
    seed: int = 12345

    def __post_init__(self):
        check_positive_int(self.num_paths, "num_paths")
        check_positive_int(self.grid_steps, "grid_steps")


@dataclass
class UQuantileTable:
    """Critical values of U_m on a grid of levels, with the config that produced them."""

    m: int
    alphas: tuple[float, ...]
    quantiles: tuple[float, ...]
    mc: QuantileMC
    dropped_paths: int


@dataclass
class SNMatrix:
    """Self-normalization matrix P, the score-sum mean, and the sample size."""

    p_hat: np.ndarray
    u_bar: np.ndarray
    n: int


def p_hat(h: np.ndarray, j: np.ndarray) -> SNMatrix:
    """P = (1/n^2) sum_t S_t S_t' from the demeaned partial sums of U_j = -J^{-1} H_j.

    Refuses short samples (n < 10 (p+q+1)^2): the pivotal limit is asymptotic
    and P is too noisy to normalize with below that.
    """
    h = np.asarray(h, dtype=float)
    n, m = h.shape
    if n < 10 * m * m:
        raise ValueError(f"self-normalization needs n >= 10*(p+q+1)^2 = {10 * m * m}, got n = {n}")
    try:
        u = -np.linalg.solve(j, h.T).T
    except np.linalg.LinAlgError as err:
        raise ValueError("j_hat is singular; cannot form the self-normalization matrix") from err
    u_bar = u.mean(axis=0)
    s = np.cumsum(u - u_bar, axis=0)
    p = (s.T @ s) / (n * n)
    return SNMatrix(p_hat=0.5 * (p + p.T), u_bar=u_bar, n=n)


def _default_cache_dir() -> Path:
    env = os.environ.get("WEAKFARIMA_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "weakfarima"


def _sample_cache_path(m: int, mc: QuantileMC, cache_dir) -> Path:
    base = Path(cache_dir) if cache_dir is not None else _default_cache_dir()
    name = f"u_sample_v{_CACHE_VERSION}_m{m}_paths{mc.num_paths}_steps{mc.grid_steps}_seed{mc.seed}.npy"
    return base / name


def _u_from_block(v: np.ndarray, b1: np.ndarray):
    """U = B(1)' V^{-1} B(1) per path; singular paths are dropped and counted."""
    try:
        sol = np.linalg.solve(v, b1[..., None])[..., 0]
        return np.einsum("pi,pi->p", b1, sol), 0
    except np.linalg.LinAlgError:
        out = []
        dropped = 0
        for vk, bk in zip(v, b1):
            try:
                out.append(float(bk @ np.linalg.solve(vk, bk)))
            except np.linalg.LinAlgError:
                dropped += 1
        return np.asarray(out), dropped


def simulate_u_sample(m: int, mc: QuantileMC):
    """Sorted Monte Carlo sample of U_m plus the count of dropped singular paths.

    Deterministic given (m, mc); the path loop is chunked only to bound memory,
    and chunk boundaries do not change the draw stream.
    """
    check_positive_int(m, "m")
    rng = np.random.default_rng(np.random.SeedSequence([mc.seed, m]))
    g = mc.grid_steps
    step_sd = 1.0 / np.sqrt(g)
    r_mid = ((np.arange(1, g + 1) - 0.5) / g)[None, :, None]

    chunk = max(1, min(mc.num_paths, 4_194_304 // (g * m)))
    pieces = []
    dropped = 0
    remaining = mc.num_paths
    while remaining > 0:
        k = min(chunk, remaining)
        b = np.cumsum(rng.standard_normal((k, g, m)) * step_sd, axis=1)
        b1 = b[:, -1, :]
        mid = b.copy()
        mid[:, 1:, :] += b[:, :-1, :]
        mid *= 0.5
        dev = mid - r_mid * b1[:, None, :]
        v = np.einsum("pki,pkj->pij", dev, dev) / g
        u, bad = _u_from_block(v, b1)
        pieces.append(u)
        dropped += bad
        remaining -= k
    sample = np.sort(np.concatenate(pieces))
    return sample, dropped


def _load_or_build_sample(m: int, mc: QuantileMC, cache_dir):
    path = _sample_cache_path(m, mc, cache_dir)
    if path.exists():
        sample = np.load(path)
        return sample, mc.num_paths - sample.size
    sample, dropped = simulate_u_sample(m, mc)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.save(path, sample)
    return sample, dropped


def u_table(m: int, alphas, mc: QuantileMC | None = None, cache_dir=None) -> UQuantileTable:
    """Critical values of U_m at several levels from the cached Monte Carlo sample."""
    mc = mc or QuantileMC()
    alphas = tuple(check_alpha(a) for a in alphas)
    sample, dropped = _load_or_build_sample(m, mc, cache_dir)
    quantiles = tuple(float(np.quantile(sample, 1.0 - a)) for a in alphas)
    return UQuantileTable(m=m, alphas=alphas, quantiles=quantiles, mc=mc, dropped_paths=dropped)


def u_quantile(m: int, alpha: float, mc: QuantileMC | None = None, cache_dir=None) -> float:
    """Empirical (1-alpha)-quantile of U_m under the given Monte Carlo config."""
    return u_table(m, (alpha,), mc, cache_dir).quantiles[0]


def sn_statistic(theta_hat, theta0, snm: SNMatrix) -> float:
    """n (theta_hat - theta0)' P^{-1} (theta_hat - theta0); compared against U_m quantiles."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta0 = np.asarray(theta0.to_vector() if hasattr(theta0, "to_vector") else theta0, dtype=float)
    diff = theta_hat - theta0
    try:
        stat = snm.n * float(diff @ np.linalg.solve(snm.p_hat, diff))
    except np.linalg.LinAlgError as err:
        smallest = float(np.min(np.linalg.eigvalsh(snm.p_hat)))
        raise ValueError(f"P is singular (smallest eigenvalue {smallest:.3e})") from err
    return stat


def sn_ci(
    theta_hat,
    snm: SNMatrix,
    alpha: float,
    i: int,
    mc: QuantileMC | None = None,
    cache_dir=None,
) -> tuple[float, float]:
    """Marginal self-normalized interval for coordinate ``i``.

    Restricts the pivotal construction to one dimension: the partial sums of
    U_j(i) alone normalize theta_i, so the statistic is
    n (theta_i - x)^2 / P_ii <= U_{1,alpha} with the scalar diagonal entry
    P_ii. Using the (i, i) entry of the matrix inverse instead would mix in
    the other coordinates and is stochastically larger (Cauchy-Schwarz), so
    it does not share the U_1 limit and over-rejects badly.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    if not 0 <= i < theta_hat.size:
        raise ValueError(f"coordinate index {i} out of range for dimension {theta_hat.size}")
    p_ii = float(snm.p_hat[i, i])
    if p_ii <= 0.0:
        raise ValueError(f"P has nonpositive diagonal entry {p_ii:.3e} at {i}")
    u1 = u_quantile(1, check_alpha(alpha), mc, cache_dir)
    half = float(np.sqrt(u1 * p_ii / snm.n))
    return float(theta_hat[i]) - half, float(theta_hat[i]) + half
