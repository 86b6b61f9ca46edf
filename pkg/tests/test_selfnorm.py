import numpy as np
import pytest
from numpy.testing import assert_allclose

from weakfarima.selfnorm import (
    QuantileMC,
    SNMatrix,
    p_hat,
    simulate_u_sample,
    sn_ci,
    sn_statistic,
    u_quantile,
    u_table,
)

SMALL_MC = QuantileMC(num_paths=4000, grid_steps=400, seed=7)


@pytest.fixture(scope="module")
def cache_dir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("uq_cache"))


def test_p_hat_constant_scores_give_zero():
    h = np.ones((50, 2))
    snm = p_hat(h, np.eye(2))
    assert_allclose(snm.p_hat, np.zeros((2, 2)), atol=0)
    assert snm.n == 50


def test_p_hat_matches_direct_loop():
    rng = np.random.default_rng(3)
    h = rng.standard_normal((30, 1))
    j = np.array([[2.0]])
    snm = p_hat(h, j)
    u = -h / 2.0
    dev = u - u.mean(axis=0)
    s = 0.0
    acc = 0.0
    for t in range(30):
        s += dev[t, 0]
        acc += s * s
    assert_allclose(snm.p_hat, [[acc / 900.0]], rtol=1e-12)
    assert_allclose(snm.u_bar, u.mean(axis=0), rtol=1e-14)


def test_p_hat_sample_size_gate():
    h = np.random.default_rng(0).standard_normal((39, 2))
    with pytest.raises(ValueError):
        p_hat(h, np.eye(2))
    p_hat(np.random.default_rng(0).standard_normal((40, 2)), np.eye(2))


def test_p_hat_singular_j_raises():
    h = np.random.default_rng(1).standard_normal((50, 2))
    with pytest.raises(ValueError):
        p_hat(h, np.zeros((2, 2)))


def test_p_hat_mean_matches_exact_formula():
    # for iid scores with variance v, E[P] = v (n^2 - 1) / (6 n^2): the
    # demeaned partial sum S_t has variance v t (n - t) / n and the t-sum
    # telescopes to (n^2 - 1) / 6
    rng = np.random.default_rng(42)
    n, reps = 300, 400
    vals = []
    for _ in range(reps):
        h = rng.standard_normal((n, 1))
        vals.append(p_hat(-h, np.eye(1)).p_hat[0, 0])
    exact = (n * n - 1.0) / (6.0 * n * n)
    assert abs(np.mean(vals) - exact) / exact < 0.1


def test_u_sample_shape_and_positivity():
    sample, dropped = simulate_u_sample(2, SMALL_MC)
    assert sample.size + dropped == SMALL_MC.num_paths
    assert dropped == 0
    assert np.all(np.diff(sample) >= 0.0)
    assert np.all(sample > 0.0)


def test_u_sample_deterministic_and_seed_sensitive():
    a, _ = simulate_u_sample(1, SMALL_MC)
    b, _ = simulate_u_sample(1, SMALL_MC)
    c, _ = simulate_u_sample(1, QuantileMC(num_paths=4000, grid_steps=400, seed=8))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_u_table_monotone_in_level(cache_dir):
    tab = u_table(1, (0.01, 0.05, 0.10), SMALL_MC, cache_dir)
    assert tab.quantiles[0] > tab.quantiles[1] > tab.quantiles[2] > 0.0
    assert tab.alphas == (0.01, 0.05, 0.10)


def test_u_table_cache_round_trip(cache_dir):
    first = u_table(2, (0.05,), SMALL_MC, cache_dir)
    again = u_table(2, (0.05,), SMALL_MC, cache_dir)
    assert first.quantiles == again.quantiles
    assert first.dropped_paths == again.dropped_paths == 0


def test_u_quantile_known_value_m1(cache_dir):
    # the level-0.05 critical value of U_1 is about 45.5 in published tables
    # of this (nuisance-free) limit distribution
    q = u_quantile(1, 0.05, QuantileMC(num_paths=50_000, grid_steps=2_000, seed=12345), cache_dir)
    assert abs(q - 45.5) / 45.5 < 0.03


def test_u_quantile_rejects_bad_alpha(cache_dir):
    with pytest.raises(ValueError):
        u_quantile(1, 0.0, SMALL_MC, cache_dir)
    with pytest.raises(ValueError):
        u_quantile(1, 1.0, SMALL_MC, cache_dir)


def test_sn_statistic_hand_values():
    snm = SNMatrix(p_hat=np.array([[2.0]]), u_bar=np.zeros(1), n=100)
    assert sn_statistic(np.array([0.3]), np.array([0.1]), snm) == pytest.approx(
        100 * 0.2**2 / 2.0, rel=1e-12
    )
    assert sn_statistic(np.array([0.3]), np.array([0.3]), snm) == 0.0


def test_sn_statistic_accepts_params_object():
    from weakfarima.model import FarimaParams

    snm = SNMatrix(p_hat=np.eye(3), u_bar=np.zeros(3), n=50)
    par = FarimaParams(ar=[-0.7], ma=[-0.2], d=0.4)
    direct = sn_statistic(par.to_vector() + 0.1, par.to_vector(), snm)
    via_params = sn_statistic(par.to_vector() + 0.1, par, snm)
    assert direct == via_params


def test_sn_statistic_singular_p_raises():
    snm = SNMatrix(p_hat=np.zeros((2, 2)), u_bar=np.zeros(2), n=50)
    with pytest.raises(ValueError):
        sn_statistic(np.ones(2), np.zeros(2), snm)


def test_sn_ci_formula(cache_dir):
    p = np.array([[0.02, 0.005], [0.005, 0.01]])
    snm = SNMatrix(p_hat=p, u_bar=np.zeros(2), n=400)
    theta = np.array([0.5, -0.3])
    lo, hi = sn_ci(theta, snm, 0.05, 0, mc=SMALL_MC, cache_dir=cache_dir)
    u1 = u_quantile(1, 0.05, SMALL_MC, cache_dir)
    half = np.sqrt(u1 * p[0, 0] / 400)
    assert lo == pytest.approx(0.5 - half, rel=1e-12)
    assert hi == pytest.approx(0.5 + half, rel=1e-12)
    # interval centered at the estimate
    assert (lo + hi) / 2.0 == pytest.approx(0.5, rel=1e-12)


def test_sn_ci_input_errors(cache_dir):
    snm = SNMatrix(p_hat=np.eye(2), u_bar=np.zeros(2), n=400)
    with pytest.raises(ValueError):
        sn_ci(np.zeros(2), snm, 0.05, 5, mc=SMALL_MC, cache_dir=cache_dir)
    bad = SNMatrix(p_hat=-np.eye(2), u_bar=np.zeros(2), n=400)
    with pytest.raises(ValueError):
        sn_ci(np.zeros(2), bad, 0.05, 0, mc=SMALL_MC, cache_dir=cache_dir)


def test_quantile_config_validation():
    with pytest.raises(ValueError):
        QuantileMC(num_paths=0)
    with pytest.raises(ValueError):
        QuantileMC(grid_steps=-5)
