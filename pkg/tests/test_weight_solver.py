import numpy as np
import pytest

from owmatcc import (SolverConfig, TrainingSet, beta_from_gamma, beta_value,
                     build_kkt_matrix, d_w_bound, equal_weight_necessity,
                     estimate_autocovariance, fixed_point_solve,
                     gamma_matrix, lagrangian_gradient, second_order_check,
                     solve_unidimensional)

import oracles


def scalar_ar_table(phi=0.8, W=6, sigma2=1.0):
    lags = [np.array([[sigma2 * phi ** m / (1 - phi ** 2)]])
            for m in range(W)]
    return oracles.table_from_lags(lags, W)


def iid_table(W, p, seed=0):
    rng = np.random.default_rng(seed)
    training = TrainingSet(rng.standard_normal((5000, W, p)))
    return estimate_autocovariance(training)


def test_kkt_w1_is_ones():
    table = scalar_ar_table(W=1)
    T = build_kkt_matrix(table, np.ones(1), np.array([1.0]))
    assert np.array_equal(T, np.ones((1, 1)))


def test_kkt_independent_structure():
    # exactly independent blocks: Rhat_{lj} = delta_{lj} R0
    R0 = np.array([[2.0, 0.3], [0.3, 1.0]])
    lags = [R0, np.zeros((2, 2)), np.zeros((2, 2))]
    table = oracles.table_from_lags(lags, 3)
    xi = np.array([1.0, 0.0])
    a = np.full(3, 1 / 3)
    T = build_kkt_matrix(table, xi, a)
    t0 = T[0, 0]
    assert t0 > 0
    expect = np.array([[t0, -t0, 0.0], [0.0, t0, -t0], [1.0, 1.0, 1.0]])
    assert np.allclose(T, expect)
    assert np.linalg.det(T) != 0


def test_kkt_nonsingular_on_benchmark(ar1_table15, xi_unit):
    T = build_kkt_matrix(ar1_table15, xi_unit, np.full(10, 0.1))
    assert abs(np.linalg.det(T)) > 0


def test_independent_data_gives_uniform_weights():
    for W in (3, 5):
        table = iid_table(W, 4, seed=W)
        xi = np.array([0.5, 0.5, 0.5, 0.5])
        rep = fixed_point_solve(table, xi, W)
        assert rep.converged
        assert np.abs(rep.weight - 1.0 / W).max() < 0.02


def test_w2_weights_are_half(ar1_table15, xi_unit):
    rep = fixed_point_solve(ar1_table15, xi_unit, 2)
    assert rep.converged
    assert np.abs(rep.weight - 0.5).max() < 0.02


def test_solution_symmetry(owma_report10):
    assert owma_report10.symmetry_defect <= 0.02


def test_kkt_residual_and_multiplier(ar1_table15, xi_unit, owma_report10):
    rep = owma_report10
    g = gamma_matrix(ar1_table15, rep.weight, xi_unit)
    rows = g @ rep.weight
    # at the optimum every row value equals the multiplier, which is 2 beta
    assert np.abs(rows - rep.lagrange_multiplier).max() < 1e-6 * abs(
        rep.lagrange_multiplier)
    assert rep.lagrange_multiplier == pytest.approx(2 * rep.beta_value,
                                                    rel=1e-8)


def test_beta_scalar_reciprocal():
    lags = [np.array([[4.0]])]
    table = oracles.table_from_lags(lags, 1)
    assert beta_value(table, np.array([1.0]), np.ones(1)) == pytest.approx(
        0.125)


def test_beta_homogeneity():
    table = scalar_ar_table(W=4)
    scaled = oracles.table_from_lags(
        [3.0 * table.blocks[m, 0] for m in range(4)], 4)
    a = np.array([0.4, 0.1, 0.2, 0.3])
    xi = np.ones(1)
    assert beta_value(scaled, a, xi) == pytest.approx(
        beta_value(table, a, xi) / 3.0)


def test_beta_two_formulas_agree(ar1_table15, xi_unit):
    rng = np.random.default_rng(8)
    for _ in range(10):
        a = rng.standard_normal(7)
        a /= a.sum()
        b1 = beta_value(ar1_table15, a, xi_unit)
        b2 = beta_from_gamma(ar1_table15, a, xi_unit)
        assert abs(b1 - b2) <= 1e-10 * abs(b1)


def test_optimal_beta_dominates_uniform(ar1_table15, xi_unit,
                                        owma_report10):
    b_ma = beta_value(ar1_table15, np.full(10, 0.1), xi_unit)
    assert owma_report10.beta_value >= b_ma


def test_optimal_beta_dominates_random_feasible(ar1_table15, xi_unit,
                                                owma_report10):
    rng = np.random.default_rng(9)
    for _ in range(500):
        a = rng.standard_normal(10)
        a /= a.sum()
        if np.abs(a).max() > owma_report10.d_w:
            continue
        assert owma_report10.beta_value >= beta_value(
            ar1_table15, a, xi_unit) - 1e-9


def test_optimal_beta_nondecreasing_in_w(ar1_table15, xi_unit):
    prev = None
    for W in range(1, 13):
        rep = fixed_point_solve(ar1_table15, xi_unit, W)
        padded = None
        if prev is not None:
            padded = beta_value(ar1_table15,
                                np.concatenate([prev.weight, [0.0]]),
                                xi_unit)
            assert rep.beta_value >= padded - 1e-9
        prev = rep


def test_inf_norm_bound(owma_report10):
    assert owma_report10.inf_norm_max <= owma_report10.d_w + 1e-9
    assert owma_report10.sum_deviation_max <= 1e-12


def test_unidimensional_matches_fixed_point():
    for phi in (0.8, -0.5, 0.3):
        table = scalar_ar_table(phi=phi, W=5)
        closed = solve_unidimensional(table, 5)
        iterated = fixed_point_solve(table, np.ones(1), 5,
                                     SolverConfig(tol=1e-14))
        assert iterated.converged
        assert np.abs(closed.weight - iterated.weight).max() <= 1e-8


def test_unidimensional_w1():
    table = scalar_ar_table(W=1)
    rep = solve_unidimensional(table, 1)
    assert rep.weight == pytest.approx([1.0])


def test_unidimensional_independent_is_uniform():
    lags = [np.array([[2.0]])] + [np.zeros((1, 1))] * 4
    table = oracles.table_from_lags(lags, 5)
    rep = solve_unidimensional(table, 5)
    assert np.allclose(rep.weight, 0.2)
    assert rep.second_order_ok == "strict"


def test_second_order_strict_on_independent():
    lags = [np.array([[1.5]])] + [np.zeros((1, 1))] * 3
    table = oracles.table_from_lags(lags, 4)
    hess = second_order_check(table, np.full(4, 0.25), np.ones(1))
    assert hess.verdict == "strict"
    # signed minor of order k is k * g0^(k-1) on independent scalar data,
    # with g0 = xi^T S^-1 R0 S^-1 xi = W^2 / theta at the uniform weight
    W, theta = 4, 1.5
    g0 = W ** 2 / theta
    for k in range(2, W + 1):
        assert hess.bordered_minors[k - 2] == pytest.approx(
            k * g0 ** (k - 1), rel=1e-8)


def test_second_order_violated_away_from_optimum():
    table = scalar_ar_table(phi=0.8, W=3)
    # a point far from the maximizer: the sign pattern must break
    a_bad = np.array([4.0, -3.5, 0.5])
    hess = second_order_check(table, a_bad, np.ones(1))
    assert hess.verdict == "violated"
    assert np.allclose(hess.h_matrix, hess.h_matrix.T)


def test_equal_weight_necessity_independent():
    lags = [np.array([[1.0]])] + [np.zeros((1, 1))] * 4
    table = oracles.table_from_lags(lags, 5)
    res = equal_weight_necessity(table, np.ones(1), 5)
    assert res.shape == (4,)
    assert np.abs(res).max() < 1e-12


def test_equal_weight_necessity_periodic():
    # scalar process with R_j = R_{W-j}: residuals vanish identically
    W = 6
    vals = {0: 2.0, 1: 0.8, 2: 0.5, 3: 0.4}
    lags = [np.array([[vals[min(m, W - m) if m else 0]]]) for m in range(W)]
    table = oracles.table_from_lags(lags, W)
    res = equal_weight_necessity(table, np.ones(1), W)
    assert np.abs(res).max() < 1e-12


def test_equal_weight_necessity_benchmark(ar1_table15, xi_unit):
    res = equal_weight_necessity(ar1_table15, xi_unit, 10)
    assert np.abs(res).max() > 1.0  # plain MA is clearly suboptimal here


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(12)
    A = np.array([[0.5, 0.2], [-0.1, 0.4]])
    lags = oracles.var1_autocovariance(A, np.eye(2), 5)
    table = oracles.table_from_lags(lags, 5)
    xi = np.array([0.6, -0.8])
    for _ in range(10):
        a = rng.standard_normal(5)
        a /= a.sum()
        lam = 2 * beta_value(table, a, xi)
        grad = lagrangian_gradient(table, a, xi, lam)
        fd = np.empty(5)
        h = 1e-6
        for l in range(5):
            e = np.zeros(5)
            e[l] = h
            up = beta_value(table, a + e, xi) + lam * ((a + e).sum() - 1)
            dn = beta_value(table, a - e, xi) + lam * ((a - e).sum() - 1)
            fd[l] = (up - dn) / (2 * h)
        denom = max(np.abs(grad).max(), 1e-12)
        assert np.abs(grad - fd).max() / denom <= 1e-5


def test_multi_start_is_deterministic(ar1_table15, xi_unit):
    cfg = SolverConfig(extra_starts=4, seed=7)
    r1 = fixed_point_solve(ar1_table15, xi_unit, 6, cfg)
    r2 = fixed_point_solve(ar1_table15, xi_unit, 6, cfg)
    assert np.array_equal(r1.weight, r2.weight)
    assert r1.beta_value == r2.beta_value


def test_rejects_non_unit_direction(ar1_table15):
    with pytest.raises(ValueError):
        fixed_point_solve(ar1_table15, np.array([1.0, 1.0, 0.0, 0.0]), 3)


def test_d_w_bound_value(ar1_table15):
    from owmatcc import assemble_block_covariance
    gamma = assemble_block_covariance(ar1_table15, 4)
    expect = (5 / 8) * gamma.lambda_max / gamma.lambda_min
    assert d_w_bound(ar1_table15, 4) == pytest.approx(expect)
