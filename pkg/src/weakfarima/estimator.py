"""Scikit-learn style front end for the FARIMA least-squares machinery.

The estimator wraps :func:`weakfarima.lse.fit` in the familiar
construct/fit/inspect cycle: hyperparameters in ``__init__`` (so ``get_params``,
``set_params`` and ``clone`` work), data-dependent state in trailing-underscore
attributes after ``fit``. The input is a single 1-D series rather than a
feature matrix; ``transform`` extracts the innovations of a series under the
fitted parameters.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .inference import ci_wald, h_process, j_hat, sandwich_estimate
from .lse import fit
from .model import FarimaParams, FeasibleRegion, residuals, residuals_with_grad
from .selfnorm import QuantileMC, p_hat, sn_ci, sn_statistic
from .validation import as_series


class FarimaEstimator(BaseEstimator):
    """FARIMA(p, d, q) least-squares estimator with dependence-robust inference.

    Parameters mirror :func:`weakfarima.lse.fit`. After ``fit`` the instance
    exposes ``theta_`` (flat vector (a_1..a_p, b_1..b_q, d)), ``params_``,
    ``sigma2_``, ``n_``, and the full ``result_``.
    """

    def __init__(
        self,
        p: int = 0,
        q: int = 0,
        delta: float = 0.01,
        d_lo: float = -0.49,
        d_hi: float = 0.49,
        multistart_d: tuple = (-0.3, 0.0, 0.3),
        max_iter: int = 500,
        tol: float = 1e-6,
    ):
        self.p = p
        self.q = q
        self.delta = delta
        self.d_lo = d_lo
        self.d_hi = d_hi
        self.multistart_d = multistart_d
        self.max_iter = max_iter
        self.tol = tol

    def _region(self) -> FeasibleRegion:
        return FeasibleRegion(delta=self.delta, d_lo=self.d_lo, d_hi=self.d_hi)

    def fit(self, X, y=None):
        """Estimate the parameters from a 1-D series (y is ignored)."""
        x = as_series(X, name="X")
        result = fit(
            x,
            self.p,
            self.q,
            self._region(),
            multistart_d=self.multistart_d,
            max_iter=self.max_iter,
            tol=self.tol,
        )
        self.result_ = result
        self.theta_ = result.theta_hat
        self.params_ = result.params
        self.sigma2_ = result.sigma2_hat
        self.n_ = x.size
        self._x_train = x
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise ValueError("this FarimaEstimator is not fitted yet; call fit first")

    def transform(self, X) -> np.ndarray:
        """Innovations of ``X`` under the fitted parameters."""
        self._check_fitted()
        return residuals(self.params_, as_series(X, name="X"))

    def score(self, X, y=None) -> float:
        """Negative mean squared innovation (higher is better, sklearn convention)."""
        self._check_fitted()
        e = self.transform(X)
        return -float(np.mean(e * e))

    def conf_int(self, alpha: float = 0.05, method: str = "modified", r: int | str = "aic") -> np.ndarray:
        """Wald intervals on the training fit: 'standard' or sandwich-'modified'."""
        self._check_fitted()
        if method not in ("standard", "modified"):
            raise ValueError("method must be 'standard' or 'modified'")
        res = residuals_with_grad(self.params_, self._x_train)
        sw = sandwich_estimate(res, r=r)
        omega = sw.omega_standard if method == "standard" else sw.omega_hat
        return ci_wald(self.theta_, omega, self.n_, alpha)

    def sn_conf_int(self, alpha: float = 0.05, mc: QuantileMC | None = None, cache_dir=None) -> np.ndarray:
        """Per-coordinate self-normalized intervals on the training fit."""
        self._check_fitted()
        res = residuals_with_grad(self.params_, self._x_train)
        snm = p_hat(h_process(res), j_hat(res))
        out = [sn_ci(self.theta_, snm, alpha, i, mc, cache_dir) for i in range(self.theta_.size)]
        return np.asarray(out)

    def sn_test_statistic(self, theta0) -> float:
        """Self-normalized statistic for H0: theta = theta0, on the training fit."""
        self._check_fitted()
        if isinstance(theta0, FarimaParams):
            theta0 = theta0.to_vector()
        res = residuals_with_grad(self.params_, self._x_train)
        snm = p_hat(h_process(res), j_hat(res))
        return sn_statistic(self.theta_, np.asarray(theta0, dtype=float), snm)
