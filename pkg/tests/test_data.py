import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horses import PenaltySpec, StandardizationReport, destandardize, group_extract, standardize
from horses.data import Dataset, pairwise_abs_sum
from horses.exceptions import (
    ConstantColumnError,
    DimensionMismatchError,
    InvalidPenaltyError,
    NonFiniteInputError,
)


class TestStandardize:
    def test_already_standard_is_identity(self):
        x = np.array([[-1.0, 1.0], [0.0, -1.0], [1.0, 0.0]]) / math.sqrt(2)
        y = np.array([1.0, -2.0, 1.0])
        ds, rep = standardize(x, y)
        np.testing.assert_allclose(ds.x, x, atol=1e-15)
        np.testing.assert_allclose(ds.y, y, atol=1e-15)
        np.testing.assert_allclose(rep.col_scales, 1.0)
        np.testing.assert_allclose(rep.col_means, 0.0, atol=1e-15)
        assert rep.y_mean == pytest.approx(0.0, abs=1e-15)

    def test_single_column_arithmetic(self):
        ds, rep = standardize(np.array([[1.0], [2.0], [3.0]]), np.array([0.0, 1.0, 2.0]))
        assert rep.col_scales[0] == pytest.approx(math.sqrt(2))
        np.testing.assert_allclose(ds.x[:, 0], [-1 / math.sqrt(2), 0, 1 / math.sqrt(2)])

    def test_constant_column(self):
        with pytest.raises(ConstantColumnError):
            standardize(np.array([[5.0], [5.0], [5.0]]), np.zeros(3))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            standardize(np.ones((3, 2)), np.ones(4))

    def test_non_finite(self):
        x = np.array([[1.0], [np.nan], [2.0]])
        with pytest.raises(NonFiniteInputError):
            standardize(x, np.zeros(3))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(3, 15), st.integers(1, 6))
    def test_columns_centered_unit_norm(self, seed, n, p):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((n, p)) * rng.uniform(0.5, 5, p) + rng.uniform(-3, 3, p)
        ds, _ = standardize(x, rng.standard_normal(n))
        np.testing.assert_allclose(ds.x.mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose((ds.x**2).sum(axis=0), 1, rtol=1e-12)
        assert abs(ds.y.mean()) < 1e-12


class TestDestandardize:
    def test_identity_report(self):
        beta, b0 = destandardize(np.array([1.0, -2.0]), StandardizationReport.identity(2))
        np.testing.assert_array_equal(beta, [1.0, -2.0])
        assert b0 == 0.0

    def test_arithmetic(self):
        rep = StandardizationReport(4.0, np.array([3.0]), np.array([2.0]))
        beta, b0 = destandardize(np.array([1.0]), rep)
        np.testing.assert_allclose(beta, [0.5])
        assert b0 == pytest.approx(2.5)

    def test_round_trip_predictions(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((10, 3)) * 4 + 1
        y = rng.standard_normal(10) + 7
        ds, rep = standardize(x, y)
        b = rng.standard_normal(3)
        raw, b0 = destandardize(b, rep)
        np.testing.assert_allclose(x @ raw + b0, ds.x @ b + rep.y_mean, atol=1e-12)


class TestGroupExtract:
    def test_groups_and_zero_set(self):
        g = group_extract(np.array([3.0, 3.0, 0.0, 1.5]))
        assert g.df == 2
        members = sorted(sorted(m) for _, m in g.groups)
        assert members == [[0, 1], [3]]
        assert sorted(g.zero_set) == [2]

    def test_all_zero(self):
        g = group_extract(np.zeros(4))
        assert g.df == 0 and not g.groups

    def test_empty(self):
        assert group_extract(np.array([])).df == 0

    def test_tolerance(self):
        assert group_extract(np.array([1.0, 1.0 + 1e-10, 2.0])).df == 2
        assert group_extract(np.array([1.0, 1.0 + 1e-6, 2.0])).df == 3

    def test_labels(self):
        g = group_extract(np.array([0.0, 2.0, 2.0, -1.0]))
        lab = g.labels(4)
        assert lab[0] == 0
        assert lab[1] == lab[2] != lab[3]

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.sampled_from([-2.0, -0.5, 0.0, 0.7, 3.0]), min_size=1, max_size=12))
    def test_df_counts_distinct_nonzero(self, values):
        assert group_extract(np.array(values)).df == len({v for v in values if v != 0})


class TestPenaltySpec:
    def test_lambdas(self):
        pen = PenaltySpec(0.25, 2.0)
        assert pen.lambda1 == pytest.approx(0.5)
        assert pen.lambda2 == pytest.approx(1.5)

    def test_alpha_below_one_over_d(self):
        with pytest.raises(InvalidPenaltyError):
            PenaltySpec(0.1, 1.0).check(16)
        PenaltySpec(0.25, 1.0).check(16)

    def test_negative_lambda(self):
        with pytest.raises(InvalidPenaltyError):
            PenaltySpec(0.5, -1.0)

    def test_from_lambdas(self):
        pen = PenaltySpec.from_lambdas(0.0, 0.3)
        assert pen.lambda1 == 0.0
        assert pen.lambda2 == pytest.approx(0.3)
        pen.check(50)

    def test_pairwise_sum(self):
        assert pairwise_abs_sum(np.array([1.0, 3.0, 0.0])) == pytest.approx(2 + 1 + 3)
        rng = np.random.default_rng(1)
        b = rng.standard_normal(9)
        brute = sum(abs(b[j] - b[k]) for j in range(9) for k in range(j + 1, 9))
        assert pairwise_abs_sum(b) == pytest.approx(brute)


def test_dataset_rejects_bad_shapes():
    with pytest.raises(DimensionMismatchError):
        Dataset(np.ones((3, 2)), np.ones(2))
