"""Least-squares estimation of FARIMA parameters on the truncated residuals.

The estimator minimizes Q_n(theta) = (1/n) sum_t e_t(theta)^2 over the
feasible region, with the analytic gradient (2/n) sum_t e_t de_t/dtheta. The
search is a quasi-Newton (BFGS) descent with Armijo backtracking; every
accepted iterate passes the feasibility check, the memory parameter is kept
inside its bounds by projection, and the recorded objective trace is
non-increasing by construction. A small multistart over initial d values
guards against the occasional flat ridge between short- and long-memory fits.

The series is rescaled internally by its root mean square before optimizing.
Residuals are exactly linear in x, so the minimizer is unchanged; the benefit
is that convergence tolerances mean the same thing for data of any scale, and
the fitted parameters are exactly invariant under x -> c x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FarimaParams, FeasibleRegion, check_feasible, residuals, residuals_with_grad
from .validation import as_series

_ARMIJO_C1 = 1e-4
_MIN_STEP = 1e-12
_CURVATURE_FLOOR = 1e-10


def objective(params: FarimaParams, x) -> float:
    """Mean squared truncated residual Q_n(theta). Feasibility is the caller's concern."""
    e = residuals(params, x)
    return float(np.mean(e * e))


def objective_grad(params: FarimaParams, x) -> np.ndarray:
    """Analytic gradient of Q_n: (2/n) sum_t e_t de_t/dtheta."""
    res = residuals_with_grad(params, x)
    return (2.0 / res.n) * (res.grad.T @ res.eps)


@dataclass
class FitResult:
    """Outcome of one least-squares fit.

    ``sigma2_hat`` equals the objective at ``theta_hat`` on the original data.
    ``grad_norm`` is the sup-norm of the projected gradient on the internally
    rescaled series (the d component is dropped when pinned at a bound with
    the gradient pointing outside); the convergence test is
    ``grad_norm <= tol * max(1, Q_n)``. ``objective_trace`` lists accepted
    objective values on the original scale and never increases.
    """

    theta_hat: np.ndarray
    sigma2_hat: float
    grad_norm: float
    iterations: int
    converged: bool
    objective_trace: np.ndarray
    p: int
    q: int

    @property
    def params(self) -> FarimaParams:
        return FarimaParams.from_vector(self.theta_hat, self.p, self.q)


def _bfgs_update(h: np.ndarray, s: np.ndarray, y: np.ndarray) -> np.ndarray:
    rho = 1.0 / float(y @ s)
    k = np.eye(h.shape[0]) - rho * np.outer(s, y)
    return k @ h @ k.T + rho * np.outer(s, s)


def _run_descent(x, p, q, region, theta_start, max_iter, tol):
    """Projected BFGS from one start. Returns (theta, value, grad_norm, iters, converged, trace)."""
    dim = p + q + 1

    def split(th):
        return FarimaParams.from_vector(th, p, q)

    def value_and_grad(th):
        res = residuals_with_grad(split(th), x)
        val = float(np.mean(res.eps**2))
        return val, (2.0 / res.n) * (res.grad.T @ res.eps)

    def value(th):
        e = residuals(split(th), x)
        return float(np.mean(e * e))

    theta = theta_start.copy()
    val, grad = value_and_grad(theta)
    h = np.eye(dim)
    trace = [val]
    iterations = 0
    first_step = True

    def projected(th, g):
        # stationarity for the box on d: drop the d component when it is
        # pinned at a bound and the gradient points outside
        pg = g.copy()
        if th[-1] <= region.d_lo and pg[-1] > 0.0:
            pg[-1] = 0.0
        if th[-1] >= region.d_hi and pg[-1] < 0.0:
            pg[-1] = 0.0
        return pg

    def done(th, v, g):
        return float(np.max(np.abs(projected(th, g)))) <= tol * max(1.0, v)

    def line_search(direction, val, grad, theta):
        step = 1.0
        while step >= _MIN_STEP:
            cand = theta + step * direction
            cand[-1] = region.clip_d(cand[-1])
            # slope uses the actual (possibly clipped) move, not the raw direction
            move = cand - theta
            slope = float(grad @ move)
            if slope < 0.0 and check_feasible(split(cand), region):
                cval = value(cand)
                if cval <= val + _ARMIJO_C1 * slope:
                    return cand, cval
            step *= 0.5
        return None

    while iterations < max_iter and not done(theta, val, grad):
        accepted = None
        direction = -h @ grad
        if float(direction @ grad) < 0.0:
            accepted = line_search(direction, val, grad, theta)
        if accepted is None:
            # the quasi-Newton direction failed (often because clipping d at a
            # bound removed its descent component); retry from steepest descent
            h = np.eye(dim)
            accepted = line_search(-grad, val, grad, theta)
        if accepted is None:
            break

        cand, cval = accepted
        _, cgrad = value_and_grad(cand)
        s = cand - theta
        y = cgrad - grad
        ys = float(y @ s)
        if ys > _CURVATURE_FLOOR * float(np.linalg.norm(y)) * float(np.linalg.norm(s)):
            if first_step:
                h = (ys / float(y @ y)) * np.eye(dim)
                first_step = False
            h = _bfgs_update(h, s, y)
        theta, val, grad = cand, cval, cgrad
        trace.append(val)
        iterations += 1

    gnorm = float(np.max(np.abs(projected(theta, grad))))
    return theta, val, gnorm, iterations, done(theta, val, grad), np.asarray(trace)


def fit(
    x,
    p: int = 0,
    q: int = 0,
    region: FeasibleRegion | None = None,
    *,
    init: FarimaParams | None = None,
    multistart_d=(-0.3, 0.0, 0.3),
    max_iter: int = 500,
    tol: float = 1e-6,
) -> FitResult:
    """Least-squares fit of a FARIMA(p, d, q) model to a 1-D series.

    Runs one descent per starting point (a = b = 0 with d on ``multistart_d``,
    or just ``init`` when given) and keeps the lowest objective; exact ties go
    to the smaller |d|, then to the lexicographically smaller theta, so the
    result is deterministic.
    """
    if p < 0 or q < 0:
        raise ValueError("p and q must be nonnegative")
    region = region or FeasibleRegion()
    dim = p + q + 1
    x = as_series(x, min_len=10 * dim + 1, name="x")

    scale = float(np.sqrt(np.mean(x * x)))
    if scale == 0.0:
        raise ValueError("series is identically zero; nothing to fit")
    xn = x / scale

    if init is not None:
        if init.p != p or init.q != q:
            raise ValueError("init has the wrong orders (p, q)")
        if not check_feasible(init, region):
            raise ValueError("init is not feasible for the given region")
        starts = [init.to_vector()]
    else:
        d_values = []
        for dg in multistart_d if len(multistart_d) else (0.0,):
            dv = region.clip_d(float(dg))
            if dv not in d_values:
                d_values.append(dv)
        starts = []
        for dv in d_values:
            th = np.zeros(dim)
            th[-1] = dv
            starts.append(th)

    runs = [_run_descent(xn, p, q, region, th, max_iter, tol) for th in starts]
    best = min(runs, key=lambda r: (r[1], abs(r[0][-1]), tuple(r[0])))
    theta, _, gnorm, iterations, converged, trace = best

    params_hat = FarimaParams.from_vector(theta, p, q)
    return FitResult(
        theta_hat=theta,
        sigma2_hat=objective(params_hat, x),
        grad_norm=gnorm,
        iterations=iterations,
        converged=converged,
        objective_trace=trace * scale**2,
        p=p,
        q=q,
    )
