"""Truncated power-series arithmetic for fractional lag polynomials.

A coefficient sequence is a plain 1-D float array indexed by the power of the
lag variable: ``c[j]`` multiplies z**j. Every operation takes an explicit
truncation order M and returns an array of length M + 1, so compositions stay
exact up to the stated order.

The workhorse is the binomial expansion of the fractional difference

    (1 - z)**d = sum_j c_j(d) z**j,   c_0 = 1,  c_j = c_{j-1} (j - 1 - d) / j,

whose ratio recursion avoids Gamma evaluations entirely. It is numerically
stable for any real d (exact at integer d, where the series terminates) and
its coefficients decay like j**(-d-1) / Gamma(-d).
"""

from __future__ import annotations

import numpy as np


def frac_coeffs(d: float, m: int) -> np.ndarray:
    """Coefficients of (1 - z)**d through order ``m``, by the ratio recursion."""
    if m < 0:
        raise ValueError("truncation order must be >= 0")
    if m == 0:
        return np.ones(1)
    j = np.arange(1, m + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((j - 1.0 - d) / j)))


def frac_coeffs_dd(d: float, m: int) -> np.ndarray:
    """Derivative in d of ``frac_coeffs(d, m)``.

    Differentiating the ratio recursion term by term gives

        g_0 = 0,   g_j = g_{j-1} (j - 1 - d) / j - c_{j-1} / j,

    which stays valid at integer d where the coefficients themselves vanish.
    """
    c = frac_coeffs(d, m).tolist()
    g = np.empty(m + 1)
    g[0] = 0.0
    acc = 0.0
    for j in range(1, m + 1):
        acc = acc * (j - 1.0 - d) / j - c[j - 1] / j
        g[j] = acc
    return g


def convolve(a, b, m: int) -> np.ndarray:
    """Cauchy product of two coefficient sequences, truncated at order ``m``.

    Inputs may have different lengths; the shorter one is implicitly
    zero-padded.
    """
    if m < 0:
        raise ValueError("truncation order must be >= 0")
    a = np.asarray(a, dtype=float)[: m + 1]
    b = np.asarray(b, dtype=float)[: m + 1]
    out = np.convolve(a, b)[: m + 1]
    if out.size < m + 1:
        out = np.pad(out, (0, m + 1 - out.size))
    return out


def invert_unit_poly(p, m: int) -> np.ndarray:
    """Reciprocal series of a polynomial with constant term 1, through order ``m``.

    Forward substitution: q_0 = 1 and q_i = -sum_{k=1..min(i, deg p)} p_k q_{i-k}.
    The result satisfies convolve(p, q, m) = (1, 0, ..., 0) exactly in exact
    arithmetic, regardless of where the roots of p lie.
    """
    p = np.asarray(p, dtype=float)
    if p.size == 0 or p[0] != 1.0:
        raise ValueError("polynomial must have constant term exactly 1")
    if m < 0:
        raise ValueError("truncation order must be >= 0")
    deg = p.size - 1
    q = np.empty(m + 1)
    q[0] = 1.0
    for i in range(1, m + 1):
        k = min(i, deg)
        q[i] = -np.dot(p[1 : k + 1], q[i - k : i][::-1]) if k else 0.0
    return q


def log_one_minus_z(m: int) -> np.ndarray:
    """Series of log(1 - z): zero constant term, then -1/j at order j."""
    if m < 0:
        raise ValueError("truncation order must be >= 0")
    out = np.zeros(m + 1)
    if m:
        out[1:] = -1.0 / np.arange(1, m + 1)
    return out
