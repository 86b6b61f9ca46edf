import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import gammaln

from weakfarima.series import (
    convolve,
    frac_coeffs,
    frac_coeffs_dd,
    invert_unit_poly,
    log_one_minus_z,
)


def gamma_route(d, m):
    # c_j(d) = Gamma(j - d) / (Gamma(j + 1) Gamma(-d)), evaluated in log space.
    # Independent of the ratio recursion; restricted to d < 0 where every
    # factor is positive.
    assert d < 0
    j = np.arange(m + 1, dtype=float)
    return np.exp(gammaln(j - d) - gammaln(j + 1) - gammaln(-d))


def test_frac_coeffs_hand_values():
    assert_allclose(frac_coeffs(0.4, 3), [1.0, -0.4, -0.12, -0.064], rtol=0, atol=1e-15)


def test_frac_coeffs_integer_d_terminates():
    assert_allclose(frac_coeffs(0.0, 4), [1, 0, 0, 0, 0], atol=0)
    assert_allclose(frac_coeffs(1.0, 4), [1, -1, 0, 0, 0], atol=1e-15)
    assert_allclose(frac_coeffs(2.0, 5), [1, -2, 1, 0, 0, 0], atol=1e-14)


def test_frac_coeffs_matches_gamma_ratio():
    for d in (-0.45, -0.3, -0.05):
        assert_allclose(frac_coeffs(d, 50), gamma_route(d, 50), rtol=1e-12)


def test_frac_coeffs_positive_d_matches_gamma_ratio_in_log_space():
    # for d in (0, 1/2) every c_j with j >= 1 is negative; compare log |c_j|
    d, m = 0.4, 2000
    c = frac_coeffs(d, m)
    assert c[0] == 1.0
    assert np.all(c[1:] < 0.0)
    j = np.arange(1, m + 1, dtype=float)
    log_abs_expected = gammaln(j - d) - gammaln(j + 1) - gammaln(1.0 - d) + np.log(d)
    assert_allclose(np.log(-c[1:]), log_abs_expected, rtol=0, atol=1e-10)


def test_frac_coeffs_power_law_tail():
    # c_j ~ j**(-d-1) / Gamma(-d); check the ratio stabilizes near 1
    d = 0.3
    c = frac_coeffs(d, 100_000)
    j = np.array([1_000, 10_000, 100_000])
    # Gamma(-d) = Gamma(1 - d) / (-d)
    gamma_minus_d = np.exp(gammaln(1.0 - d)) / (-d)
    ratio = c[j] * j ** (d + 1.0) * gamma_minus_d
    assert_allclose(ratio, 1.0, atol=5e-4)


def test_inverse_identity_high_order():
    m = 2000
    unit = np.zeros(m + 1)
    unit[0] = 1.0
    for d in (-0.45, -0.2, 0.0, 0.2, 0.45):
        prod = convolve(frac_coeffs(d, m), frac_coeffs(-d, m), m)
        assert np.max(np.abs(prod - unit)) < 1e-10


def test_dd_hand_values():
    assert_allclose(frac_coeffs_dd(0.0, 2), [0.0, -1.0, -0.5], atol=1e-15)
    assert_allclose(frac_coeffs_dd(0.4, 2)[2], -0.1, atol=1e-15)


def test_dd_matches_log_convolution():
    # d/dd (1-z)**d = (1-z)**d log(1-z), so the derivative series must equal
    # the Cauchy product of the coefficient series with the log series.
    m = 500
    for d in (-0.4, -0.1, 0.0, 0.25, 0.45):
        via_log = convolve(frac_coeffs(d, m), log_one_minus_z(m), m)
        assert np.max(np.abs(frac_coeffs_dd(d, m) - via_log)) < 1e-10


def test_dd_matches_central_differences():
    h = 1e-6
    for d in (-0.3, 0.0, 0.4):
        g = frac_coeffs_dd(d, 500)
        fd = (frac_coeffs(d + h, 500) - frac_coeffs(d - h, 500)) / (2.0 * h)
        scale = np.maximum(np.abs(fd), 1e-8)
        assert np.max(np.abs(g - fd) / scale) < 1e-6


def test_coefficient_magnitude_decreasing_in_tail():
    for d in (-0.45, -0.2, 0.2, 0.45):
        c = np.abs(frac_coeffs(d, 10_000))
        tail = c[100:]
        assert np.all(np.diff(tail) < 0.0)


def test_log_series_values():
    assert_allclose(log_one_minus_z(3), [0.0, -1.0, -0.5, -1.0 / 3.0], rtol=1e-15)
    assert log_one_minus_z(0).tolist() == [0.0]


def test_invert_geometric():
    assert_allclose(invert_unit_poly([1.0, -0.5], 4), [1.0, 0.5, 0.25, 0.125, 0.0625], rtol=1e-15)


def test_invert_round_trip_random():
    rng = np.random.default_rng(42)
    for _ in range(10):
        deg = rng.integers(1, 6)
        coef = rng.uniform(-1, 1, size=deg)
        coef *= 0.9 / max(1.0, np.sum(np.abs(coef)))  # keep the inverse well behaved
        p = np.concatenate([[1.0], coef])
        q = invert_unit_poly(p, 60)
        prod = convolve(p, q, 60)
        unit = np.zeros(61)
        unit[0] = 1.0
        assert_allclose(prod, unit, atol=1e-12)


def test_invert_requires_unit_constant():
    with pytest.raises(ValueError):
        invert_unit_poly([2.0, 1.0], 5)


def test_convolve_zero_pads():
    assert_allclose(convolve([1.0, 1.0], [1.0, -1.0], 4), [1, 0, -1, 0, 0], atol=0)


def test_negative_order_rejected():
    for fn in (lambda m: frac_coeffs(0.1, m), lambda m: frac_coeffs_dd(0.1, m), log_one_minus_z):
        with pytest.raises(ValueError):
            fn(-1)
