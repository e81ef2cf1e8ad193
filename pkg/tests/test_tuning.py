import math

import numpy as np
import pytest

from horses import Dataset, TuningGrid, bic, degrees_of_freedom, gcv, information_criterion, kfold_cv, validation_pe
from horses.data import FitResult, group_extract
from horses.exceptions import BadKError, DfTooLargeError, EmptyGridError, InvalidPenaltyError, NonpositiveRSSError
from horses.tuning import fold_assignment, make_fitter, select_best


def _fit_from(beta):
    g = group_extract(np.asarray(beta, float))
    return FitResult(np.asarray(beta, float), g, 0.0, g.df)


def _raw(seed, n=30, p=4, noise=1.0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p)) * 2 + 1
    y = x @ np.array([1.0, 1.0, 0.0, -0.5])[:p] + noise * rng.standard_normal(n) + 3
    return Dataset(x, y)


class TestCriteria:
    def test_gcv_values(self):
        assert gcv(10, 20, 0) == pytest.approx(0.5)
        assert gcv(10, 20, 10) == pytest.approx(1.0)

    def test_gcv_df_equals_n(self):
        with pytest.raises(DfTooLargeError):
            gcv(1.0, 5, 5)

    def test_bic_values(self):
        assert bic(1.0, 7, 0) == 0.0
        assert bic(math.e, 10, 2) == pytest.approx(14.6052, abs=1e-4)

    def test_bic_zero_rss(self):
        with pytest.raises(NonpositiveRSSError):
            bic(0.0, 10, 1)

    def test_df_equal_coefficients(self):
        assert degrees_of_freedom(_fit_from([0.85] * 8)) == 1

    def test_df_zero(self):
        assert degrees_of_freedom(_fit_from(np.zeros(5))) == 0


class TestGrid:
    def test_sorted(self):
        g = TuningGrid((1.0, 0.5), (0.1, 1.0, 0.5))
        assert g.alphas == (0.5, 1.0)
        assert g.lambdas == (1.0, 0.5, 0.1)

    def test_empty(self):
        with pytest.raises(EmptyGridError):
            TuningGrid(())
        with pytest.raises(EmptyGridError):
            TuningGrid((1.0,), ())

    def test_alpha_bound_checked_for_horses(self):
        with pytest.raises(InvalidPenaltyError):
            TuningGrid((0.1, 1.0)).check(16)

    def test_default(self):
        g = TuningGrid.default(16)
        assert g.alphas[0] == pytest.approx(0.25) and g.alphas[-1] == 1.0
        assert len(g.alphas) == 10

    def test_lambda_table_starts_at_null_level(self):
        ds = _raw(0)
        from horses import standardize

        std, _ = standardize(ds.x, ds.y)
        table = TuningGrid((0.5, 1.0), n_lambdas=5).lambda_table(std)
        top = np.abs(std.x.T @ std.y).max()
        assert table.shape == (2, 5)
        assert table[0, 0] == pytest.approx(top / 0.5)
        assert table[1, -1] == pytest.approx(top * 1e-4)


class TestSelectBest:
    def test_tie_goes_to_larger_lambda_then_alpha(self):
        scores = np.array([[1.0, 1.0], [1.0, 2.0]])
        lams = np.array([[0.5, 0.1], [0.5, 0.1]])
        assert select_best(scores, [0.5, 1.0], lams) == (1, 0)

    def test_dominating_point(self):
        scores = np.array([[3.0, 0.5, 2.0]])
        assert select_best(scores, [1.0], np.array([[3.0, 2.0, 1.0]])) == (0, 1)

    def test_all_infinite(self):
        with pytest.raises(EmptyGridError):
            select_best(np.full((1, 2), np.inf), [1.0], np.ones((1, 2)))


class TestFolds:
    def test_partition(self):
        folds = fold_assignment(23, 5, seed=1)
        allidx = np.sort(np.concatenate(folds))
        np.testing.assert_array_equal(allidx, np.arange(23))
        sizes = [f.size for f in folds]
        assert max(sizes) - min(sizes) <= 1

    def test_seeded(self):
        a = fold_assignment(20, 4, 9)
        b = fold_assignment(20, 4, 9)
        assert all(np.array_equal(u, v) for u, v in zip(a, b))

    @pytest.mark.parametrize("k", [1, 31])
    def test_bad_k(self, k):
        with pytest.raises(BadKError):
            fold_assignment(30, k, 0)


class TestKFold:
    def test_single_point_ols(self):
        ds = _raw(2)
        res = kfold_cv(ds, TuningGrid((1.0,), (0.0,)), k=5, seed=3)
        # direct per-fold OLS with intercept on the raw scale
        total = 0.0
        for hold in fold_assignment(ds.n, 5, 3):
            tr = np.setdiff1d(np.arange(ds.n), hold)
            a = np.column_stack([np.ones(tr.size), ds.x[tr]])
            coef, *_ = np.linalg.lstsq(a, ds.y[tr], rcond=None)
            pred = coef[0] + ds.x[hold] @ coef[1:]
            total += float(np.sum((ds.y[hold] - pred) ** 2))
        assert res.score_surface[0, 0] == pytest.approx(total, rel=1e-8)
        assert res.best_lambda == 0.0 and res.best_alpha == 1.0

    def test_huge_lambda_null_model(self):
        ds = _raw(4)
        res = kfold_cv(ds, TuningGrid((1.0,), (1e9,)), k=3, seed=0)
        expected = 0.0
        for hold in fold_assignment(ds.n, 3, 0):
            tr = np.setdiff1d(np.arange(ds.n), hold)
            expected += float(np.sum((ds.y[hold] - ds.y[tr].mean()) ** 2))
        assert res.score_surface[0, 0] == pytest.approx(expected, rel=1e-10)

    def test_result_fields(self):
        res = kfold_cv(_raw(5), TuningGrid((0.5, 1.0), n_lambdas=4), k=4, seed=11)
        assert res.criterion.value == "cv"
        assert res.score_surface.shape == (2, 4)
        assert res.seed == 11 and len(res.folds) == 4
        assert res.raw_beta.shape == (4,)
        d = res.to_dict()
        assert d["best_alpha"] == res.best_alpha

    def test_reproducible(self):
        a = kfold_cv(_raw(6), TuningGrid((0.5, 1.0), n_lambdas=4), k=4, seed=1)
        b = kfold_cv(_raw(6), TuningGrid((0.5, 1.0), n_lambdas=4), k=4, seed=1)
        np.testing.assert_array_equal(a.score_surface, b.score_surface)


class TestInformationCriterion:
    @pytest.mark.parametrize("crit", ["gcv", "bic"])
    def test_runs(self, crit):
        res = information_criterion(_raw(7), TuningGrid((0.5, 1.0), n_lambdas=6), crit)
        assert np.isfinite(res.score_surface).any()
        assert res.criterion.value == crit

    def test_rejects_cv(self):
        with pytest.raises(ValueError):
            information_criterion(_raw(7), TuningGrid((1.0,), (0.1,)), "cv")

    def test_undefined_points_score_inf(self):
        # df = p = n at lambda 0 makes GCV undefined there
        rng = np.random.default_rng(0)
        ds = Dataset(rng.standard_normal((4, 4)), rng.standard_normal(4))
        res = information_criterion(ds, TuningGrid((1.0,), (0.0, 100.0)), "gcv")
        assert np.isinf(res.score_surface[0, 1])


class TestValidation:
    def test_valid_equals_train_picks_smallest_rss(self):
        ds = _raw(8)
        res = validation_pe(ds, ds, TuningGrid((1.0,), (1.0, 0.1, 0.0)))
        assert res.best_lambda == 0.0

    def test_noiseless_perfect_fit(self):
        ds = _raw(9, noise=0.0)
        res = validation_pe(ds, ds, TuningGrid((1.0,), (0.0, 1.0)))
        assert res.score_surface.min() == pytest.approx(0.0, abs=1e-18)

    @pytest.mark.parametrize("method", ["lasso", "enet", "ridge"])
    def test_baseline_fitters(self, method):
        alphas = (0.0,) if method == "ridge" else (0.5, 1.0)
        res = validation_pe(_raw(10), _raw(11), TuningGrid(alphas, n_lambdas=5), fitter=method)
        assert res.fit.method == method

    def test_custom_fitter(self):
        calls = []
        inner = make_fitter("lasso")

        def fitter(ds, alpha, lams):
            calls.append(alpha)
            return inner(ds, alpha, lams)

        validation_pe(_raw(12), _raw(13), TuningGrid((1.0,), n_lambdas=3), fitter=fitter)
        assert calls == [1.0]

    def test_dimension_mismatch(self):
        from horses.exceptions import DimensionMismatchError

        with pytest.raises(DimensionMismatchError):
            validation_pe(_raw(1, p=4), _raw(1, p=3), TuningGrid((1.0,), (0.1,)))
