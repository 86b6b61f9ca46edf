"""FARIMA(p, d, q) parameterization, feasibility checks, and truncated residuals.

The model is a(L) (1-L)**d X_t = b(L) eps_t with

    a(L) = 1 - a_1 L - ... - a_p L^p,    b(L) = 1 - b_1 L - ... - b_q L^q,

d in (-1/2, 1/2), and innovations that are only assumed uncorrelated (weak
white noise). Parameters travel either as a :class:`FarimaParams` record or as
the flat vector (a_1..a_p, b_1..b_q, d); the memory parameter always sits
last.

Residuals are computed from the observed window alone: values of the series
and of the innovations before the sample are treated as zero. Writing
F_t = sum_{j=0}^{t-1} c_j(d) X_{t-j} for the truncated fractional difference,
the residual recursion is

    e_t = F_t - sum_i a_i F_{t-i} + sum_j b_j e_{t-j},      e_s = 0 for s <= 0,

which is an exact linear filter in X: an FFT convolution builds F and a
direct-form IIR pass applies the moving-average feedback. Gradients follow by
differentiating the same recursion, so they share its O(n log n) cost:

    de_t/da_i = -F_{t-i}            + sum_l b_l de_{t-l}/da_i
    de_t/db_j = e_{t-j}             + sum_l b_l de_{t-l}/db_j
    de_t/dd   = F'_t - sum_i a_i F'_{t-i} + sum_l b_l de_{t-l}/dd

with F' the analogous sum built from the d-derivative of the fractional
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve, lfilter

from .series import frac_coeffs, frac_coeffs_dd
from .validation import as_series

# slack for the companion-matrix root solve when comparing against 1 + delta
ROOT_MODULUS_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FarimaParams:
    """Parameter record: AR coefficients, MA coefficients, memory parameter d."""

    ar: np.ndarray
    ma: np.ndarray
    d: float

    def __post_init__(self):
        object.__setattr__(self, "ar", np.atleast_1d(np.asarray(self.ar, dtype=float)))
        object.__setattr__(self, "ma", np.atleast_1d(np.asarray(self.ma, dtype=float)))
        object.__setattr__(self, "d", float(self.d))
        if self.ar.ndim != 1 or self.ma.ndim != 1:
            raise ValueError("ar and ma must be one-dimensional")
        if not (np.all(np.isfinite(self.ar)) and np.all(np.isfinite(self.ma)) and np.isfinite(self.d)):
            raise ValueError("parameters must be finite")

    @property
    def p(self) -> int:
        return self.ar.size

    @property
    def q(self) -> int:
        return self.ma.size

    @property
    def dim(self) -> int:
        return self.ar.size + self.ma.size + 1

    def to_vector(self) -> np.ndarray:
        """Flatten to (a_1..a_p, b_1..b_q, d)."""
        return np.concatenate([self.ar, self.ma, [self.d]])

    @classmethod
    def from_vector(cls, theta, p: int, q: int) -> "FarimaParams":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (p + q + 1,):
            raise ValueError(f"theta must have length p + q + 1 = {p + q + 1}, got shape {theta.shape}")
        return cls(ar=theta[:p].copy(), ma=theta[p : p + q].copy(), d=float(theta[-1]))


@dataclass(frozen=True)
class FeasibleRegion:
    """Parameter region the estimator searches over.

    ``delta`` keeps every AR and MA root at modulus >= 1 + delta, and
    [d_lo, d_hi] is a closed subinterval of (-1/2, 1/2). The bounds on d are
    user configuration; nothing narrows them from the data.
    """

    delta: float = 0.01
    d_lo: float = -0.49
    d_hi: float = 0.49

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not (-0.5 < self.d_lo <= self.d_hi < 0.5):
            raise ValueError(f"need -0.5 < d_lo <= d_hi < 0.5, got [{self.d_lo}, {self.d_hi}]")

    def clip_d(self, d: float) -> float:
        return float(min(max(d, self.d_lo), self.d_hi))


@dataclass
class ResidualSet:
    """Residuals and their parameter gradient at a fixed theta.

    ``eps`` has shape (n,); ``grad`` has shape (n, p + q + 1) with columns in
    flat-vector order; ``theta`` is the flat vector they were evaluated at.
    """

    eps: np.ndarray
    grad: np.ndarray
    theta: np.ndarray

    @property
    def n(self) -> int:
        return self.eps.size


def _min_root_modulus(coef: np.ndarray) -> float:
    """Smallest root modulus of 1 - c_1 z - ... - c_k z^k; inf if the poly is constant."""
    c = np.trim_zeros(np.asarray(coef, dtype=float), "b")
    if c.size == 0:
        return np.inf
    # descending powers for np.roots: (-c_k, ..., -c_1, 1)
    roots = np.roots(np.concatenate([-c[::-1], [1.0]]))
    return float(np.min(np.abs(roots))) if roots.size else np.inf


def check_feasible(params: FarimaParams, region: FeasibleRegion = FeasibleRegion()) -> bool:
    """True when d is inside the region's bounds and all lag-polynomial roots
    have modulus >= 1 + delta (up to the root-solver tolerance)."""
    if not (region.d_lo <= params.d <= region.d_hi):
        return False
    bound = 1.0 + region.delta - ROOT_MODULUS_TOL
    if _min_root_modulus(params.ar) < bound:
        return False
    if _min_root_modulus(params.ma) < bound:
        return False
    return True


def _shift(v: np.ndarray, k: int) -> np.ndarray:
    """Delay by k steps with zero fill: out[t] = v[t - k], out[:k] = 0."""
    n = v.size
    if k >= n:
        return np.zeros(n)
    out = np.empty(n)
    out[:k] = 0.0
    out[k:] = v[: n - k]
    return out


def _trunc_frac_diff(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """F_t = sum_{j=0}^{t-1} coeffs[j] x_{t-j}, i.e. the causal convolution
    truncated to the sample."""
    return fftconvolve(coeffs, x)[: x.size]


def _ar_comb(v: np.ndarray, ar: np.ndarray) -> np.ndarray:
    """v_t - sum_i a_i v_{t-i} with zero pre-sample values."""
    out = v.copy()
    for i, a in enumerate(ar, start=1):
        if i < v.size:
            out[i:] -= a * v[:-i]
    return out


def _ma_feedback(rhs: np.ndarray, ma: np.ndarray) -> np.ndarray:
    """Solve e_t = rhs_t + sum_j b_j e_{t-j} with zero initial conditions."""
    if ma.size == 0:
        return rhs.copy()
    return lfilter([1.0], np.concatenate([[1.0], -ma]), rhs)


def residuals(params: FarimaParams, x) -> np.ndarray:
    """Truncated one-step residuals of the series under ``params``.

    Exactly linear in x. Early residuals carry a truncation error from the
    zeroed pre-sample; it fades at a polynomial rate governed by d.
    """
    x = as_series(x)
    alpha = frac_coeffs(params.d, x.size - 1)
    f = _trunc_frac_diff(alpha, x)
    return _ma_feedback(_ar_comb(f, params.ar), params.ma)


def residuals_with_grad(params: FarimaParams, x) -> ResidualSet:
    """Residuals together with the (n, p+q+1) matrix of their theta-derivatives."""
    x = as_series(x)
    n = x.size
    p, q = params.p, params.q

    alpha = frac_coeffs(params.d, n - 1)
    f = _trunc_frac_diff(alpha, x)
    eps = _ma_feedback(_ar_comb(f, params.ar), params.ma)

    grad = np.empty((n, p + q + 1))
    for i in range(1, p + 1):
        grad[:, i - 1] = _ma_feedback(-_shift(f, i), params.ma)
    for j in range(1, q + 1):
        grad[:, p + j - 1] = _ma_feedback(_shift(eps, j), params.ma)
    fd = _trunc_frac_diff(frac_coeffs_dd(params.d, n - 1), x)
    grad[:, p + q] = _ma_feedback(_ar_comb(fd, params.ar), params.ma)

    return ResidualSet(eps=eps, grad=grad, theta=params.to_vector())
