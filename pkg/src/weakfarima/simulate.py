"""Sample-path generation for FARIMA processes under three innovation designs.

The three noise kinds share a second moment structure (uncorrelated, constant
variance) but differ in dependence:

* :class:`Strong`      iid N(0, 1), the benchmark where classical standard
                       errors are valid;
* :class:`Garch`       eps_t = sigma_t eta_t with a GARCH(1,1) volatility
                       recursion, a martingale difference but not independent;
* :class:`WeakProduct` eps_t = eta_t**2 eta_{t-1}, uncorrelated yet not even a
                       martingale difference.

Paths are built causally from zero pre-sample values: the noise is filtered by
the MA polynomial, fractionally integrated with the MA(inf) kernel of
(1-z)**(-d) truncated at ``ma_trunc`` lags, then run through the AR recursion;
the first ``burn_in`` values are discarded so the returned window is close to
stationary. Longer kernels and burn-in shrink the (polynomially small)
initialization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve, lfilter

from .model import FarimaParams
from .series import frac_coeffs
from .validation import as_rng


@dataclass(frozen=True)
class Strong:
    """iid standard normal innovations."""


@dataclass(frozen=True)
class Garch:
    """GARCH(1,1) innovations started at the stationary variance.

    eps_t = sigma_t eta_t,  sigma_t^2 = omega + alpha eps_{t-1}^2 + beta sigma_{t-1}^2,
    sigma_0^2 = omega / (1 - alpha - beta), eta iid N(0, 1). The defaults are
    the semi-strong Monte Carlo design; the marginal variance is
    omega / (1 - alpha - beta).
    """

    omega: float = 0.04
    alpha: float = 0.12
    beta: float = 0.85

    def __post_init__(self):
        if not self.omega > 0.0:
            raise ValueError("omega must be positive")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError("alpha and beta must be nonnegative")
        if not self.alpha + self.beta < 1.0:
            raise ValueError("need alpha + beta < 1 for a stationary variance")


@dataclass(frozen=True)
class WeakProduct:
    """eps_t = eta_t**2 eta_{t-1}, eta iid N(0, 1).

    Zero mean, variance E[eta^4] E[eta^2] = 3, zero autocorrelation at every
    lag, but strongly dependent: the canonical weak (non martingale
    difference) design.
    """


NoiseKind = Strong | Garch | WeakProduct


def noise_variance(kind: NoiseKind) -> float:
    """Marginal innovation variance of the design."""
    if isinstance(kind, Strong):
        return 1.0
    if isinstance(kind, Garch):
        return kind.omega / (1.0 - kind.alpha - kind.beta)
    if isinstance(kind, WeakProduct):
        return 3.0
    raise TypeError(f"unknown noise kind: {kind!r}")


def gen_noise(kind: NoiseKind, count: int, seed) -> np.ndarray:
    """Draw ``count`` innovations; same (kind, count, seed) gives identical output."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    rng = as_rng(seed)
    if isinstance(kind, Strong):
        return rng.standard_normal(count)
    if isinstance(kind, Garch):
        eta = rng.standard_normal(count)
        eps = np.empty(count)
        omega, alpha, beta = kind.omega, kind.alpha, kind.beta
        s2 = omega / (1.0 - alpha - beta)
        for t in range(count):
            e = math.sqrt(s2) * eta[t]
            eps[t] = e
            s2 = omega + alpha * e * e + beta * s2
        return eps
    if isinstance(kind, WeakProduct):
        eta = rng.standard_normal(count + 1)
        return eta[1:] ** 2 * eta[:-1]
    raise TypeError(f"unknown noise kind: {kind!r}")


@dataclass(frozen=True)
class SimConfig:
    """Path length, initialization settings, and seed for one simulation.

    ``ma_trunc`` is the truncation order of the fractional-integration kernel,
    an accuracy knob independent of n; with the 5000 default the neglected
    kernel tail is negligible next to sampling noise for |d| < 1/2.
    """

    n: int
    burn_in: int = 2000
    ma_trunc: int = 5000
    seed: int | np.random.SeedSequence = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.ma_trunc < 1:
            raise ValueError("ma_trunc must be >= 1")


def simulate_farima(theta0: FarimaParams, kind: NoiseKind, cfg: SimConfig):
    """Simulate a FARIMA path; returns (x, eps), both of length cfg.n.

    ``eps`` holds the innovations aligned with the returned window, so
    residuals taken at theta0 should track it up to truncation error.
    """
    total = cfg.burn_in + cfg.n
    eps = gen_noise(kind, total, cfg.seed)

    u = eps.copy()
    for j, b in enumerate(theta0.ma, start=1):
        if j < total:
            u[j:] -= b * eps[:-j]

    if theta0.d != 0.0:
        kernel = frac_coeffs(-theta0.d, cfg.ma_trunc)
        v = fftconvolve(kernel, u)[:total]
    else:
        v = u

    if theta0.p:
        x = lfilter([1.0], np.concatenate([[1.0], -theta0.ar]), v)
    else:
        x = v

    return x[cfg.burn_in :], eps[cfg.burn_in :]
