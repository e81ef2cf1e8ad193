"""scikit-learn compatible wrappers.

Each estimator standardizes the training data internally, fits on the
standardized scale and exposes raw-scale ``coef_`` and ``intercept_``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from . import baselines
from .data import PenaltySpec, destandardize, standardize
from .solver import SolverConfig, solve


class _StandardizedRegressor(RegressorMixin, BaseEstimator):
    def _fit_standardized(self, dataset):
        raise NotImplementedError

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True, dtype=np.float64)
        if X.shape[0] < 2:
            raise ValueError(f"n_samples={X.shape[0]}; at least 2 rows are needed to standardize")
        dataset, report = standardize(X, y)
        result = self._fit_standardized(dataset)
        self.fit_result_ = result
        self.standardization_ = report
        self.coef_standardized_ = result.beta
        self.coef_, self.intercept_ = destandardize(result.beta, report)
        self.groups_ = result.groups
        self.df_ = result.df
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, reset=False, dtype=np.float64)
        return X @ self.coef_ + self.intercept_


class HorsesRegressor(_StandardizedRegressor):
    """Least squares with the penalty ``lam * (alpha*L1 + (1 - alpha)*pairwise fusion)``.

    Parameters
    ----------
    alpha : float
        Mixing weight in ``[1/d, 1]``.
    lam : float
        Overall penalty level on the standardized scale.
    d : float or None
        Lower-bound parameter for ``alpha``; ``None`` means ``sqrt(n_features)``.
    max_sweeps, kkt_tol, fusion_pair_strategy
        Solver settings, see :class:`horses.solver.SolverConfig`.
    """

    def __init__(self, alpha=1.0, lam=1.0, d=None, max_sweeps=10000, kkt_tol=1e-6,
                 fusion_pair_strategy="all_pairs"):
        self.alpha = alpha
        self.lam = lam
        self.d = d
        self.max_sweeps = max_sweeps
        self.kkt_tol = kkt_tol
        self.fusion_pair_strategy = fusion_pair_strategy

    def _fit_standardized(self, dataset):
        config = SolverConfig(
            max_sweeps=self.max_sweeps,
            kkt_tol=self.kkt_tol,
            fusion_pair_strategy=self.fusion_pair_strategy,
        )
        return solve(dataset, PenaltySpec(self.alpha, self.lam, self.d), config)


class RidgeRegressor(_StandardizedRegressor):
    """Minimizes ``0.5*||y - Xb||^2 + lam*||b||^2`` on the standardized scale."""

    def __init__(self, lam=1.0):
        self.lam = lam

    def _fit_standardized(self, dataset):
        return baselines.fit_ridge(dataset, self.lam)


class LassoRegressor(_StandardizedRegressor):
    def __init__(self, lam=1.0):
        self.lam = lam

    def _fit_standardized(self, dataset):
        return baselines.fit_lasso(dataset, self.lam)


class ElasticNetRegressor(_StandardizedRegressor):
    """``0.5*||y - Xb||^2 + lam*alpha*||b||_1 + lam*(1 - alpha)*||b||^2``."""

    def __init__(self, lam=1.0, alpha=0.5):
        self.lam = lam
        self.alpha = alpha

    def _fit_standardized(self, dataset):
        return baselines.fit_elastic_net(dataset, self.lam, self.alpha)
