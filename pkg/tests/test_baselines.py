import numpy as np
import pytest

from owmatcc import AR1Config, simulate_ar1
from owmatcc.baselines import (dpca_fit, dpca_scores, lag_stack, ma_pca,
                               ma_smooth, ma_tcc, pca_fit, pca_scores)


@pytest.fixture(scope="module")
def ar1_long_run():
    return simulate_ar1(AR1Config(), 50000, seed=7)


def test_ma_tcc_weight(ar1_training10):
    chart = ma_tcc(ar1_training10)
    assert np.allclose(chart.weight, 0.1)


def test_ma_tcc_w1_is_plain_t2(ar1_training10):
    from owmatcc import monitor
    tr1 = ar1_training10.window(1)
    chart = ma_tcc(tr1)
    X = simulate_ar1(AR1Config(), 50, seed=1)
    series = monitor(X, chart)
    d = X - chart.x_tilde
    expect = np.einsum("np,pq,nq->n", d, np.linalg.inv(chart.s_tilde), d)
    assert np.allclose(series.value, expect)


def test_pca_isotropic_cpv_linear():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((20000, 4))
    model = pca_fit(X, cpv=0.95)
    cum = np.cumsum(model.variances) / model.variances.sum()
    assert np.abs(cum - np.arange(1, 5) / 4).max() < 0.02
    assert model.r == 4


def test_pca_q_zero_inside_subspace(ar1_long_run):
    model = pca_fit(ar1_long_run, cpv=0.95)
    P = model.loadings[:, :model.r]
    # a point in the retained subspace has zero residual
    x = model.mean + (P @ np.array([1.0, -2.0, 0.5])) * model.scale
    _, q = pca_scores(model, x[None, :])
    assert q[0] == pytest.approx(0.0, abs=1e-20)


def test_pca_full_rank_decomposition(ar1_long_run):
    model = pca_fit(ar1_long_run, cpv=1.0)
    assert model.r == 4
    t2, q = pca_scores(model, ar1_long_run[:100])
    z = (ar1_long_run[:100] - model.mean) / model.scale
    maha = np.einsum("np,pq,nq->n", z,
                     np.linalg.inv(np.cov(
                         (ar1_long_run - model.mean) / model.scale,
                         rowvar=False)), z)
    assert np.abs(q).max() < 1e-20
    assert np.allclose(t2, maha, rtol=1e-6)


def test_pca_benchmark_retains_three(ar1_long_run):
    assert pca_fit(ar1_long_run, cpv=0.95).r == 3


def test_dpca_lag0_equals_pca(ar1_long_run):
    pca = pca_fit(ar1_long_run, cpv=0.95)
    dpca = dpca_fit(ar1_long_run, lag=0, cpv=0.95)
    assert dpca.pca.r == pca.r
    t2a, qa = pca_scores(pca, ar1_long_run[:50])
    t2b, qb = dpca_scores(dpca, ar1_long_run[:50])
    assert np.allclose(t2a, t2b) and np.allclose(qa, qb)


def test_dpca_component_counts(ar1_long_run):
    assert dpca_fit(ar1_long_run, lag=1, cpv=0.99).pca.r == 5
    assert dpca_fit(ar1_long_run, lag=9, cpv=0.99).pca.r == 12


def test_lag_stack_order():
    X = np.arange(10.0)[:, None]
    S = lag_stack(X, 2)
    # newest block first: row k = [x_k, x_{k-1}, x_{k-2}]
    assert np.array_equal(S[0], [2.0, 1.0, 0.0])
    assert np.array_equal(S[-1], [9.0, 8.0, 7.0])


def test_ma_smooth_identity_and_constant():
    x = np.arange(8.0)
    assert np.array_equal(ma_smooth(x, 1), x)
    c = np.full((10, 3), 2.5)
    assert np.allclose(ma_smooth(c, 4), 2.5)


def test_ma_smooth_matrix():
    x = np.arange(12.0).reshape(6, 2)
    out = ma_smooth(x, 3)
    assert out.shape == (4, 2)
    assert np.allclose(out[0], x[:3].mean(axis=0))


def test_ma_pca_statistic_mode_shapes(ar1_long_run):
    model = pca_fit(ar1_long_run, cpv=0.95)
    X = simulate_ar1(AR1Config(), 409, seed=11)
    res = ma_pca(model, X, 10)
    assert len(res.t2) == 400
    assert res.t2_limit > 0 and res.q_limit > 0


def test_ma_pca_observation_mode(ar1_long_run):
    model = pca_fit(ar1_long_run, cpv=0.95)
    X = simulate_ar1(AR1Config(), 409, seed=11)
    res = ma_pca(model, X, 10, mode="observation")
    assert len(res.t2) == 400
    # smoothing-first inflates false alarms even more on this process
    assert res.t2_alarm.mean() > 0.05


def test_baseline_far_band_on_independent_data():
    rng = np.random.default_rng(5)
    fit = rng.standard_normal((50000, 4))
    model = pca_fit(fit, cpv=0.999, alpha=0.01)
    test = rng.standard_normal((50000, 4))
    t2, q = pca_scores(model, test)
    far = float((t2 > model.t2_limit).mean())
    assert 0.01 / 3 <= far <= 0.01 * 3
    if model.r < 4:
        far_q = float((q > model.q_limit).mean())
        assert 0.01 / 3 <= far_q <= 0.01 * 3


def test_ma_tcc_far_band_on_independent_data():
    from owmatcc import TrainingSet, monitor
    rng = np.random.default_rng(6)
    training = TrainingSet(rng.standard_normal((5000, 10, 4)))
    chart = ma_tcc(training, alpha=0.01)
    X = rng.standard_normal((50009, 4))
    far = float(monitor(X, chart).alarm.mean())
    assert 0.01 / 3 <= far <= 0.01 * 3
