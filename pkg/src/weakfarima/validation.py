"""Input checking helpers shared across the package."""

from __future__ import annotations

import numpy as np


def as_series(x, min_len: int = 1, name: str = "x") -> np.ndarray:
    """Coerce ``x`` to a 1-D float64 array and validate it.

    Accepts anything array-like, including an (n, 1) column, which is
    squeezed. Rejects NaN or infinite entries and series shorter than
    ``min_len``.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_len:
        raise ValueError(f"{name} needs at least {min_len} observations, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def as_rng(seed) -> np.random.Generator:
    """Build a Generator from an int seed or SeedSequence; pass Generators through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def replication_seed(base_seed: int, r: int) -> np.random.SeedSequence:
    """Seed for replication ``r`` of a study keyed by ``base_seed``.

    SeedSequence hashes the pair, so streams for different replications are
    independent and the mapping is stable across runs and platforms.
    """
    return np.random.SeedSequence([int(base_seed), int(r)])


def check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be strictly between 0 and 1, got {alpha}")
    return float(alpha)


def check_positive_int(value, name: str) -> int:
    out = int(value)
    if out <= 0:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return out
