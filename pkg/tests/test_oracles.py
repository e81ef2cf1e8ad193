import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horses import Dataset, OracleConfig, PenaltySpec, flsa_1d, grid_solve_2d, oracle_solve, solve
from horses.exceptions import InstanceTooLargeError, MaxItersExceeded, WrongDimensionError
from horses.prox import fusion_prox
from horses.solver import objective

from conftest import random_standardized

cp = pytest.importorskip("cvxpy")


def _cvx_prox(a, lam1, lam2):
    b = cp.Variable(a.size)
    pairs = [cp.abs(b[j] - b[k]) for j in range(a.size) for k in range(j + 1, a.size)]
    expr = 0.5 * cp.sum_squares(b - a) + lam1 * cp.norm1(b)
    if pairs:
        expr = expr + lam2 * sum(pairs)
    cp.Problem(cp.Minimize(expr)).solve(solver="CLARABEL", tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    return b.value


def _prox_obj(b, a, lam1, lam2):
    pair = sum(abs(b[j] - b[k]) for j in range(b.size) for k in range(j + 1, b.size))
    return 0.5 * np.sum((b - a) ** 2) + lam1 * np.abs(b).sum() + lam2 * pair


class TestFusionProx:
    @settings(max_examples=30, deadline=None)
    @given(
        st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=7),
        st.sampled_from([0.0, 0.1, 0.7]),
        st.sampled_from([0.0, 0.05, 0.4]),
    )
    def test_matches_conic_solver(self, values, lam1, lam2):
        a = np.array(values)
        ours = fusion_prox(a, lam1, lam2)
        ref = _cvx_prox(a, lam1, lam2)
        assert _prox_obj(ours, a, lam1, lam2) <= _prox_obj(ref, a, lam1, lam2) + 1e-8

    def test_zero_penalty_identity(self):
        a = np.array([3.0, -1.0, 0.5])
        np.testing.assert_array_equal(fusion_prox(a, 0, 0), a)

    def test_large_fusion_collapses_to_mean(self):
        a = np.array([1.0, 2.0, 6.0])
        np.testing.assert_allclose(fusion_prox(a, 0, 100.0), 3.0)

    def test_order_preserved(self):
        a = np.random.default_rng(0).standard_normal(10)
        b = fusion_prox(a, 0.1, 0.05)
        order = np.argsort(a)
        assert np.all(np.diff(b[order]) >= -1e-15)


class TestOracleSolve:
    def test_zero_lambda_ols(self, small_dataset):
        fit = oracle_solve(small_dataset, PenaltySpec(1.0, 0.0))
        ols = np.linalg.solve(small_dataset.x.T @ small_dataset.x, small_dataset.x.T @ small_dataset.y)
        r = small_dataset.y - small_dataset.x @ ols
        assert fit.objective == pytest.approx(0.5 * r @ r, rel=1e-7)

    def test_single_column_soft_threshold(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((10, 1))
        x /= np.linalg.norm(x)
        y = rng.standard_normal(10)
        lam = 0.2
        z = float(x[:, 0] @ y)
        expected = np.sign(z) * max(abs(z) - lam, 0.0)
        fit = oracle_solve(Dataset(x, y), PenaltySpec(1.0, lam))
        assert fit.beta[0] == pytest.approx(expected, abs=1e-7)

    def test_subgradient_rule_close(self, small_dataset):
        pen = PenaltySpec.from_lambdas(0.1, 0.1)
        prox = oracle_solve(small_dataset, pen)
        cfg = OracleConfig(step_rule="diminishing_subgradient", max_iters=200_000)
        try:
            sub = oracle_solve(small_dataset, pen, cfg)
        except MaxItersExceeded as exc:
            sub = exc.result
        assert sub.objective >= prox.objective - 1e-9
        assert sub.objective <= prox.objective * (1 + 1e-3)

    def test_too_large(self):
        ds = Dataset(np.random.default_rng(0).standard_normal((30, 21)), np.zeros(30))
        with pytest.raises(InstanceTooLargeError):
            oracle_solve(ds, PenaltySpec(1.0, 1.0))

    def test_budget_exceeded_carries_result(self, small_dataset):
        with pytest.raises(MaxItersExceeded) as info:
            oracle_solve(small_dataset, PenaltySpec(0.5, 0.1), OracleConfig(max_iters=3))
        assert info.value.result is not None

    def test_two_by_two_vs_grid(self):
        ds = Dataset(np.array([[1.0, 0.4], [0.3, 1.0]]), np.array([1.2, -0.7]))
        pen = PenaltySpec.from_lambdas(0.1, 0.2)
        _, f_grid = grid_solve_2d(ds, pen, -5, 5, 1e-2, refine=2)
        fit = oracle_solve(ds, pen)
        assert fit.objective <= f_grid + 1e-6


class TestFlsa:
    def test_no_penalty(self):
        y = np.array([1.0, -3.0, 2.5])
        np.testing.assert_allclose(flsa_1d(y, 0, 0), y, atol=1e-9)

    def test_frozen_two_point(self):
        # optimum of 0.5*((2-a)^2 + (2+b)^2) + |a-b|, confirmed by the 2-D grid below
        b = flsa_1d(np.array([2.0, -2.0]), 0.0, 1.0)
        np.testing.assert_allclose(b, [1.0, -1.0], atol=1e-7)
        beta, f = grid_solve_2d(Dataset(np.eye(2), np.array([2.0, -2.0])), PenaltySpec.from_lambdas(0, 1), -5, 5, 1e-2, refine=2)
        np.testing.assert_allclose(beta, [1.0, -1.0], atol=1e-5)
        assert f == pytest.approx(3.0, abs=1e-9)

    def test_length_limit(self):
        with pytest.raises(InstanceTooLargeError):
            flsa_1d(np.zeros(51), 0.1, 0.1)

    def test_agrees_with_prox(self):
        # with X = I the problem is exactly the prox of the penalty
        y = np.random.default_rng(2).standard_normal(30)
        np.testing.assert_allclose(flsa_1d(y, 0.2, 0.03), fusion_prox(y, 0.2, 0.03), atol=1e-7)


class TestGrid:
    def test_orthonormal_zero_lambda(self):
        q, _ = np.linalg.qr(np.random.default_rng(4).standard_normal((6, 2)))
        y = np.random.default_rng(5).standard_normal(6)
        step = 1e-2
        beta, _ = grid_solve_2d(Dataset(q, y), PenaltySpec(1.0, 0.0), -5, 5, step)
        np.testing.assert_allclose(beta, q.T @ y, atol=step)

    def test_symmetric_instance(self):
        x = np.array([[1.0, 0.5], [0.5, 1.0], [1.0, 1.0]])
        y = np.array([1.0, 1.0, 2.0])
        step = 1e-2
        beta, _ = grid_solve_2d(Dataset(x, y), PenaltySpec.from_lambdas(0.2, 0.1), -5, 5, step)
        assert abs(beta[0] - beta[1]) <= step

    def test_wrong_dimension(self, small_dataset):
        with pytest.raises(WrongDimensionError):
            grid_solve_2d(small_dataset, PenaltySpec(1.0, 1.0), -1, 1, 0.1)

    def test_solver_matches_grid(self):
        ds = random_standardized(77, 10, 2)
        pen = PenaltySpec.from_lambdas(0.1, 0.5)
        # the optimum here is near (-9.2, -4.5), so the box must reach past -5
        _, f = grid_solve_2d(ds, pen, -12, 12, 1e-2, refine=2)
        fit = solve(ds, pen)
        assert fit.objective <= f + 1e-9
        assert objective(ds, fit.beta, pen) == pytest.approx(f, abs=1e-5)
