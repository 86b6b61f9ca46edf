import numpy as np
import pytest
from numpy.testing import assert_allclose

from weakfarima.model import (
    FarimaParams,
    FeasibleRegion,
    check_feasible,
    residuals,
    residuals_with_grad,
)
from weakfarima.series import convolve, frac_coeffs, invert_unit_poly, log_one_minus_z
from weakfarima.simulate import SimConfig, Strong, simulate_farima

THETA0 = FarimaParams(ar=[-0.7], ma=[-0.2], d=0.4)


def series_route(params, x):
    """Residuals via one composed power series: e = [b(z)^-1 a(z) (1-z)^d] x.

    A completely different evaluation order from the filter implementation,
    used as its oracle.
    """
    n = x.size
    a_poly = np.concatenate([[1.0], -params.ar])
    b_poly = np.concatenate([[1.0], -params.ma])
    gamma = convolve(
        convolve(invert_unit_poly(b_poly, n - 1), a_poly, n - 1),
        frac_coeffs(params.d, n - 1),
        n - 1,
    )
    return np.array([np.dot(gamma[: t + 1], x[t::-1]) for t in range(n)])


def series_route_grad(params, x):
    """Gradient columns via derivatives of the composed series."""
    n = x.size
    m = n - 1
    a_poly = np.concatenate([[1.0], -params.ar])
    b_poly = np.concatenate([[1.0], -params.ma])
    b_inv = invert_unit_poly(b_poly, m)
    frac = frac_coeffs(params.d, m)
    cols = []
    for i in range(1, params.p + 1):
        shift = np.zeros(m + 1)
        shift[i] = 1.0
        cols.append(convolve(convolve(b_inv, -shift, m), frac, m))
    base = convolve(convolve(b_inv, a_poly, m), frac, m)
    for j in range(1, params.q + 1):
        shift = np.zeros(m + 1)
        shift[j] = 1.0
        # d(b^-1)/db_j = z^j b^-2, so the column series is z^j b^-1 gamma
        cols.append(convolve(convolve(b_inv, shift, m), base, m))
    cols.append(convolve(base, log_one_minus_z(m), m))
    out = np.empty((n, len(cols)))
    for c, g in enumerate(cols):
        out[:, c] = [np.dot(g[: t + 1], x[t::-1]) for t in range(n)]
    return out


def test_params_vector_round_trip():
    th = THETA0.to_vector()
    assert_allclose(th, [-0.7, -0.2, 0.4], atol=0)
    back = FarimaParams.from_vector(th, 1, 1)
    assert_allclose(back.ar, THETA0.ar, atol=0)
    assert_allclose(back.ma, THETA0.ma, atol=0)
    assert back.d == THETA0.d
    assert THETA0.dim == 3


def test_params_from_vector_wrong_length():
    with pytest.raises(ValueError):
        FarimaParams.from_vector([0.1, 0.2], 1, 1)


def test_params_rejects_nonfinite():
    with pytest.raises(ValueError):
        FarimaParams(ar=[np.nan], ma=[], d=0.0)


def test_feasible_region_validates_bounds():
    with pytest.raises(ValueError):
        FeasibleRegion(delta=0.0)
    with pytest.raises(ValueError):
        FeasibleRegion(d_lo=-0.5)
    with pytest.raises(ValueError):
        FeasibleRegion(d_lo=0.2, d_hi=0.1)


def test_check_feasible_cases():
    region = FeasibleRegion(delta=0.01, d_lo=-0.49, d_hi=0.49)
    assert check_feasible(FarimaParams(ar=[0.9], ma=[-0.5], d=0.4), region)
    assert check_feasible(FarimaParams(ar=[], ma=[], d=0.0), region)
    # AR root at modulus 1/0.995 < 1.01
    assert not check_feasible(FarimaParams(ar=[0.995], ma=[], d=0.0), region)
    assert not check_feasible(FarimaParams(ar=[], ma=[0.995], d=0.0), region)
    # root modulus exactly 1 + delta counts as inside
    assert check_feasible(FarimaParams(ar=[1.0 / 1.01], ma=[], d=0.0), region)
    assert not check_feasible(FarimaParams(ar=[0.5], ma=[], d=0.5), region)
    assert not check_feasible(FarimaParams(ar=[0.5], ma=[], d=-0.5), region)


def test_residuals_identity_when_no_dynamics():
    x = np.random.default_rng(1).standard_normal(50)
    e = residuals(FarimaParams(ar=[], ma=[], d=0.0), x)
    assert_allclose(e, x, atol=0)


def test_residuals_hand_recursions():
    x = np.array([1.0, 2.0, -1.0, 0.5])
    # pure AR(1): e_t = x_t - a x_{t-1}
    e = residuals(FarimaParams(ar=[0.5], ma=[], d=0.0), x)
    assert_allclose(e, [1.0, 1.5, -2.0, 1.0], atol=1e-14)
    # pure MA(1): e_t = x_t + b e_{t-1}
    b = -0.4
    e = residuals(FarimaParams(ar=[], ma=[b], d=0.0), x)
    expect = np.empty(4)
    prev = 0.0
    for t in range(4):
        prev = x[t] + b * prev
        expect[t] = prev
    assert_allclose(e, expect, atol=1e-14)


def test_residuals_match_series_route():
    rng = np.random.default_rng(7)
    x = rng.standard_normal(200)
    for params in (
        THETA0,
        FarimaParams(ar=[0.3, -0.2], ma=[0.4], d=-0.3),
        FarimaParams(ar=[], ma=[0.6], d=0.2),
        FarimaParams(ar=[0.5], ma=[], d=0.0),
    ):
        assert np.max(np.abs(residuals(params, x) - series_route(params, x))) < 1e-8


def test_gradient_matches_series_route():
    rng = np.random.default_rng(8)
    x = rng.standard_normal(200)
    for params in (THETA0, FarimaParams(ar=[0.3, -0.2], ma=[0.4], d=-0.3)):
        res = residuals_with_grad(params, x)
        oracle = series_route_grad(params, x)
        assert res.grad.shape == (200, params.dim)
        assert np.max(np.abs(res.grad - oracle)) < 1e-8


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(9)
    x = rng.standard_normal(150)
    th = np.array([0.35, -0.25, 0.15])
    res = residuals_with_grad(FarimaParams.from_vector(th, 1, 1), x)
    h = 1e-6
    for i in range(3):
        tp, tm = th.copy(), th.copy()
        tp[i] += h
        tm[i] -= h
        fd = (
            residuals(FarimaParams.from_vector(tp, 1, 1), x)
            - residuals(FarimaParams.from_vector(tm, 1, 1), x)
        ) / (2.0 * h)
        assert np.max(np.abs(res.grad[:, i] - fd)) < 1e-6


def test_residuals_linear_in_x():
    rng = np.random.default_rng(10)
    x = rng.standard_normal(120)
    res1 = residuals_with_grad(THETA0, x)
    res2 = residuals_with_grad(THETA0, 10.0 * x)
    # atol floor absorbs FFT rounding on entries that are exact zeros in
    # exact arithmetic
    assert_allclose(res2.eps, 10.0 * res1.eps, rtol=1e-12, atol=1e-10)
    assert_allclose(res2.grad, 10.0 * res1.grad, rtol=1e-12, atol=1e-10)


def test_truncation_error_fades():
    # at the generating parameters the residuals track the true innovations,
    # with an initialization error that decays as the window grows
    diffs = []
    for seed in range(30):
        x, eps = simulate_farima(THETA0, Strong(), SimConfig(n=400, seed=seed))
        diffs.append(np.abs(residuals(THETA0, x) - eps))
    d = np.mean(diffs, axis=0)
    bins = [d[0:50].mean(), d[50:100].mean(), d[100:200].mean(), d[200:400].mean()]
    assert bins[0] > bins[1] > bins[2] > bins[3]
    assert bins[3] < 0.05


def test_score_orthogonality_at_truth():
    # E[e_t de_t/dtheta] = 0 at the generating value; test at 4 standard errors
    x, _ = simulate_farima(THETA0, Strong(), SimConfig(n=5000, seed=123))
    res = residuals_with_grad(THETA0, x)
    prods = res.eps[:, None] * res.grad
    mean = prods.mean(axis=0)
    se = prods.std(axis=0) / np.sqrt(res.n)
    assert np.all(np.abs(mean) <= 4.0 * se)
