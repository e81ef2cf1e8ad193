import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from horses import ElasticNetRegressor, HorsesRegressor, LassoRegressor, PenaltySpec, RidgeRegressor, solve, standardize
from horses.datasets import load_toy


@pytest.fixture
def xy():
    x, y, _ = load_toy()
    return x, y


class TestHorsesRegressor:
    def test_matches_functional_api(self, xy):
        x, y = xy
        est = HorsesRegressor(alpha=0.6, lam=0.2).fit(x, y)
        std, _ = standardize(x, y)
        ref = solve(std, PenaltySpec(0.6, 0.2))
        np.testing.assert_allclose(est.coef_standardized_, ref.beta, atol=1e-12)
        assert est.df_ == ref.df

    def test_predict_uses_raw_scale(self, xy):
        x, y = xy
        est = HorsesRegressor(alpha=1.0, lam=0.0).fit(x, y)
        a = np.column_stack([np.ones(len(y)), x])
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        np.testing.assert_allclose(est.predict(x), a @ coef, atol=1e-8)
        assert est.score(x, y) > 0

    def test_params_and_clone(self):
        est = HorsesRegressor(alpha=0.4, lam=3.0, d=5.0)
        params = est.get_params()
        assert params["alpha"] == 0.4 and params["d"] == 5.0
        c = clone(est).set_params(lam=1.0)
        assert c.lam == 1.0 and est.lam == 3.0

    def test_not_fitted(self, xy):
        with pytest.raises(NotFittedError):
            HorsesRegressor().predict(xy[0])

    def test_feature_count_checked(self, xy):
        x, y = xy
        est = HorsesRegressor(alpha=1.0, lam=0.1).fit(x, y)
        with pytest.raises(ValueError):
            est.predict(x[:, :3])

    def test_rejects_nan(self, xy):
        x, y = xy
        x = x.copy()
        x[0, 0] = np.nan
        with pytest.raises(ValueError):
            HorsesRegressor().fit(x, y)


@pytest.mark.parametrize(
    "est",
    [RidgeRegressor(lam=0.5), LassoRegressor(lam=0.05), ElasticNetRegressor(lam=0.1, alpha=0.5)],
)
def test_baseline_estimators(xy, est):
    x, y = xy
    fitted = clone(est).fit(x, y)
    assert fitted.coef_.shape == (x.shape[1],)
    assert fitted.predict(x).shape == y.shape
    assert np.isfinite(fitted.intercept_)


# ``alpha`` here is a mixing weight in [1/d, 1], not a strength, and ``lam`` acts on
# unit-norm columns, so the generic "fits a noisy problem well at defaults" check
# does not apply.
_TRAIN_CHECK = {"check_regressors_train": "alpha is a mixing weight and lam acts on unit-norm columns"}


@pytest.mark.parametrize(
    "est, expected",
    [
        (HorsesRegressor(), _TRAIN_CHECK),
        (RidgeRegressor(), _TRAIN_CHECK),
        (LassoRegressor(), {}),
        (ElasticNetRegressor(), _TRAIN_CHECK),
    ],
    ids=lambda v: type(v).__name__ if not isinstance(v, dict) else "",
)
def test_sklearn_conformance(est, expected):
    from sklearn.utils.estimator_checks import check_estimator

    results = check_estimator(est, on_fail=None, expected_failed_checks=expected)
    failed = [r["check_name"] for r in results if r["status"] == "failed"]
    assert failed == []
