"""Sandwich covariance for the least-squares FARIMA estimator.

Under merely uncorrelated innovations the limiting covariance of the estimator
is Omega = J^{-1} I J^{-1}: J is the curvature of the objective and I the
long-run variance of the score process H_t = 2 e_t de_t/dtheta. J has a clean
empirical counterpart; I is the score's spectral density at frequency zero
and is estimated here by fitting a vector AR(r) to the empirical score rows
and reading the spectrum off the fit,

    I_sp = Phi(1)^{-1} Sigma_u Phi(1)^{-T},   Phi(1) = Id - sum_k Phi_k,

with the AR order picked by AIC over 1..r_max unless given. The classical
shortcut Omega_strong = 2 sigma^2 J^{-1}, which is only valid for independent
innovations, is kept alongside for comparison.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .model import ResidualSet
from .validation import check_alpha

# matrices with condition numbers beyond this are used, but flagged
COND_WARN_THRESHOLD = 1e12


@dataclass
class SandwichEstimate:
    """Both covariance estimates plus the pieces they are assembled from.

    ``omega_hat`` is the dependence-robust sandwich, ``omega_standard`` the
    iid-only shortcut 2 sigma^2 J^{-1}. ``aic_trace`` lists (r, AIC(r)) pairs
    when the order was AIC-selected (NaN marks orders whose AR fit failed),
    and is None when ``r`` was given explicitly.
    """

    j_hat: np.ndarray
    i_hat: np.ndarray
    omega_hat: np.ndarray
    omega_standard: np.ndarray
    r_selected: int
    aic_trace: list[tuple[int, float]] | None


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _inverse_checked(a: np.ndarray, label: str) -> np.ndarray:
    """Inverse with an SVD condition report; warns past COND_WARN_THRESHOLD."""
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond > COND_WARN_THRESHOLD:
        warnings.warn(
            f"{label} has condition number {cond:.3e}; the inverse is unreliable",
            RuntimeWarning,
            stacklevel=3,
        )
    try:
        return np.linalg.solve(a, np.eye(a.shape[0]))
    except np.linalg.LinAlgError as err:
        raise ValueError(f"{label} is singular and cannot be inverted") from err


def j_hat(res: ResidualSet) -> np.ndarray:
    """Curvature estimate (2/n) sum_t g_t g_t', symmetric PSD by construction."""
    g = res.grad
    if res.n < g.shape[1]:
        raise ValueError("need at least p + q + 1 observations for j_hat")
    return _symmetrize((2.0 / res.n) * (g.T @ g))


def h_process(res: ResidualSet) -> np.ndarray:
    """Empirical score rows H_t = 2 e_t de_t/dtheta, shape (n, p+q+1)."""
    return 2.0 * res.eps[:, None] * res.grad


def _lagged_design(h: np.ndarray, r: int) -> np.ndarray:
    """Row t holds (H_{t-1}, ..., H_{t-r}) flattened, with H_s = 0 for s <= 0."""
    n, m = h.shape
    padded = np.vstack([np.zeros((r, m)), h])
    return np.hstack([padded[r - k : r - k + n] for k in range(1, r + 1)])


def var_ar_fit(h: np.ndarray, r: int):
    """Least-squares VAR(r) for the score rows under the zero-padding convention.

    Returns (phi, sigma_u): phi stacks the coefficient matrices with shape
    (r, m, m), and sigma_u = (1/n) sum_t (H_t - phi . lags)(...)' is the
    empirical residual covariance. r = 0 means no regression at all, so
    sigma_u is just (1/n) sum_t H_t H_t'.
    """
    h = np.asarray(h, dtype=float)
    n, m = h.shape
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return np.zeros((0, m, m)), _symmetrize((h.T @ h) / n)

    z = _lagged_design(h, r)
    s_zz = (z.T @ z) / n
    s_hz = (h.T @ z) / n
    try:
        phi_flat = np.linalg.solve(s_zz, s_hz.T).T
    except np.linalg.LinAlgError as err:
        raise ValueError(f"lagged score covariance is singular for r={r}") from err
    if not np.all(np.isfinite(phi_flat)):
        raise ValueError(f"lagged score covariance is numerically singular for r={r}")

    u = h - z @ phi_flat.T
    sigma_u = _symmetrize((u.T @ u) / n)
    phi = np.stack([phi_flat[:, k * m : (k + 1) * m] for k in range(r)])
    return phi, sigma_u


def default_r_max(n: int) -> int:
    """Conservative AR-order ceiling max(1, floor(n^(1/5)))."""
    return max(1, int(np.floor(n ** 0.2)))


def aic_scores(h: np.ndarray, r_max: int | None = None) -> list[tuple[int, float]]:
    """AIC(r) = n log det Sigma_u(r) + 2 r m^2 for r = 1..r_max; NaN where the fit fails."""
    h = np.asarray(h, dtype=float)
    n, m = h.shape
    r_max = default_r_max(n) if r_max is None else int(r_max)
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    scores: list[tuple[int, float]] = []
    for r in range(1, r_max + 1):
        try:
            _, sigma_u = var_ar_fit(h, r)
            sign, logdet = np.linalg.slogdet(sigma_u)
            aic = n * logdet + 2.0 * r * m * m if sign > 0 and np.isfinite(logdet) else np.nan
        except ValueError:
            aic = np.nan
        scores.append((r, float(aic)))
    return scores


def select_order_aic(h: np.ndarray, r_max: int | None = None) -> int:
    """Smallest r minimizing AIC over 1..r_max; orders with failed fits are skipped."""
    scores = aic_scores(h, r_max)
    valid = [(aic, r) for r, aic in scores if np.isfinite(aic)]
    if not valid:
        raise ValueError(f"VAR fit failed at every order up to r_max={scores[-1][0]}")
    return min(valid)[1]


def i_hat_spectral(h: np.ndarray, r: int) -> np.ndarray:
    """Spectral estimate of the score's long-run variance from a VAR(r) fit."""
    phi, sigma_u = var_ar_fit(h, r)
    if r == 0:
        return sigma_u
    m = h.shape[1]
    at_one = np.eye(m) - phi.sum(axis=0)
    try:
        inv_at_one = np.linalg.solve(at_one, np.eye(m))
    except np.linalg.LinAlgError as err:
        raise ValueError(
            f"AR polynomial at frequency zero is singular for r={r}; try a smaller order"
        ) from err
    return _symmetrize(inv_at_one @ sigma_u @ inv_at_one.T)


def sandwich_estimate(res: ResidualSet, r: int | str = "aic", r_max: int | None = None) -> SandwichEstimate:
    """Assemble J, the spectral I, and both covariance estimates at the fitted theta."""
    j = j_hat(res)
    h = h_process(res)

    trace: list[tuple[int, float]] | None = None
    if isinstance(r, str):
        if r != "aic":
            raise ValueError(f"r must be an integer or 'aic', got {r!r}")
        trace = aic_scores(h, r_max)
        valid = [(aic, rr) for rr, aic in trace if np.isfinite(aic)]
        if not valid:
            raise ValueError("VAR fit failed at every candidate order")
        r_selected = min(valid)[1]
    else:
        r_selected = int(r)
        if r_selected < 0:
            raise ValueError("r must be nonnegative")

    i_sp = i_hat_spectral(h, r_selected)
    j_inv = _inverse_checked(j, "j_hat")
    sigma2 = float(np.mean(res.eps**2))
    return SandwichEstimate(
        j_hat=j,
        i_hat=i_sp,
        omega_hat=_symmetrize(j_inv @ i_sp @ j_inv),
        omega_standard=_symmetrize(2.0 * sigma2 * j_inv),
        r_selected=r_selected,
        aic_trace=trace,
    )


def ci_wald(theta_hat, omega: np.ndarray, n: int, alpha: float = 0.05) -> np.ndarray:
    """Per-coordinate normal intervals theta_i +/- z_{1-alpha/2} sqrt(omega_ii / n).

    Returns an array of shape (dim, 2) with lower bounds in the first column.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    alpha = check_alpha(alpha)
    diag = np.diag(omega)
    if np.any(diag < 0):
        raise ValueError("covariance has a negative diagonal entry")
    half = norm.ppf(1.0 - alpha / 2.0) * np.sqrt(diag / n)
    return np.column_stack([theta_hat - half, theta_hat + half])
