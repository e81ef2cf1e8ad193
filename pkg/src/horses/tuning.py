"""Tuning-parameter selection: K-fold CV, GCV, BIC and validation-set error.

All selectors take raw-scale datasets.  Each fit standardizes its own
training rows, and held-out rows are scored on the raw scale with the
back-mapped slopes and intercept.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import baselines
from .data import Dataset, FitResult, StandardizationReport, destandardize, standardize
from .exceptions import (
    BadKError,
    DfTooLargeError,
    DimensionMismatchError,
    EmptyGridError,
    InvalidPenaltyError,
    MaxSweepsExceeded,
    NonpositiveRSSError,
)
from .solver import SolverConfig, solve_path

DEFAULT_N_ALPHAS = 10
DEFAULT_N_LAMBDAS = 30
DEFAULT_LAMBDA_RATIO = 1e-4


class Criterion(str, enum.Enum):
    CV = "cv"
    GCV = "gcv"
    BIC = "bic"
    VALIDATION_PE = "validation_pe"


# ----------------------------------------------------------------------------
# information criteria


def gcv(rss: float, n: int, df: int) -> float:
    """``rss / (n - df)``."""
    if df >= n:
        raise DfTooLargeError(f"df={df} must be below n={n}")
    if rss < 0:
        raise ValueError("rss must be >= 0")
    return rss / (n - df)


def bic(rss: float, n: int, df: int) -> float:
    """``n*log(rss) + log(n)*df`` with natural logarithms."""
    if not rss > 0:
        raise NonpositiveRSSError(f"rss must be positive, got {rss}")
    if n < 1:
        raise ValueError("n must be >= 1")
    return n * math.log(rss) + math.log(n) * df


def degrees_of_freedom(fit: FitResult) -> int:
    """Number of distinct nonzero coefficient groups."""
    return len(fit.groups.groups)


# ----------------------------------------------------------------------------
# grids


def _largest_singular_sq(x):
    return float(np.linalg.norm(x, 2) ** 2)


@dataclass(frozen=True)
class TuningGrid:
    """Mixing values times penalty levels.

    ``lambdas=None`` asks for a data-driven list per alpha: ``n_lambdas``
    values log-spaced from the null level ``max|x_j^T y| / alpha`` down to
    ``lambda_ratio`` times it.  At ``alpha = 0`` (ridge) there is no null
    level; the list then spans ``[1e-4, 1e3]`` times the largest eigenvalue
    of ``X^T X``.
    """

    alphas: tuple
    lambdas: tuple | None = None
    n_lambdas: int = DEFAULT_N_LAMBDAS
    lambda_ratio: float = DEFAULT_LAMBDA_RATIO
    d: float | None = None

    def __post_init__(self):
        alphas = tuple(sorted(float(a) for a in self.alphas))
        if not alphas:
            raise EmptyGridError("the alpha grid is empty")
        if alphas[0] < 0 or alphas[-1] > 1:
            raise InvalidPenaltyError("alphas must lie in [0, 1]")
        object.__setattr__(self, "alphas", alphas)
        if self.lambdas is not None:
            lams = tuple(sorted((float(v) for v in self.lambdas), reverse=True))
            if not lams:
                raise EmptyGridError("the lambda grid is empty")
            if lams[-1] < 0 or not all(math.isfinite(v) for v in lams):
                raise InvalidPenaltyError("lambdas must be finite and >= 0")
            object.__setattr__(self, "lambdas", lams)
        elif self.n_lambdas < 1:
            raise EmptyGridError("n_lambdas must be >= 1")

    @classmethod
    def default(cls, p: int, n_alphas: int = DEFAULT_N_ALPHAS, n_lambdas: int = DEFAULT_N_LAMBDAS, d=None):
        lo = 1.0 / (math.sqrt(p) if d is None else d)
        alphas = np.linspace(min(lo, 1.0), 1.0, n_alphas)
        return cls(tuple(alphas), None, n_lambdas, DEFAULT_LAMBDA_RATIO, d)

    def check(self, p: int, horses: bool = True) -> "TuningGrid":
        if horses:
            d = math.sqrt(p) if self.d is None else self.d
            if self.alphas[0] < 1.0 / d - 1e-12:
                raise InvalidPenaltyError(f"alpha={self.alphas[0]} is below 1/d={1.0 / d}")
        return self

    def lambda_table(self, dataset: Dataset) -> np.ndarray:
        """``(n_alphas, n_lambdas)`` matrix of descending lambda values for a standardized dataset."""
        if self.lambdas is not None:
            return np.tile(np.array(self.lambdas), (len(self.alphas), 1))
        top_l1 = float(np.abs(dataset.x.T @ dataset.y).max())
        rows = []
        for a in self.alphas:
            if a > 0:
                top = top_l1 / a
                lo = top * self.lambda_ratio
            else:
                s2 = _largest_singular_sq(dataset.x)
                top, lo = 1e3 * s2, 1e-4 * s2
            if top <= 0:
                rows.append(np.zeros(self.n_lambdas))
            elif self.n_lambdas == 1:
                rows.append(np.array([top]))
            else:
                rows.append(np.geomspace(top, lo, self.n_lambdas))
        return np.array(rows)


# ----------------------------------------------------------------------------
# path fitters

PathFitter = Callable[[Dataset, float, Sequence[float]], list]


def make_fitter(method: str = "horses", config: SolverConfig | None = None, d: float | None = None) -> PathFitter:
    """A function ``(standardized dataset, alpha, lambdas) -> [FitResult]`` for ``method``.

    ``method`` is one of ``horses``, ``lasso``, ``enet`` or ``ridge``.  Paths
    are fitted in descending lambda order with warm starts and returned in
    the order of ``lambdas``.
    """
    if method == "horses":
        return lambda ds, alpha, lams: solve_path(ds, alpha, lams, config, d)
    if method not in ("lasso", "enet", "ridge"):
        raise ValueError(f"unknown method {method!r}")

    def fit_path(ds, alpha, lams):
        lams = np.asarray(lams, dtype=float)
        fits = [None] * lams.size
        beta = None
        for i in np.argsort(-lams, kind="stable"):
            lam = float(lams[i])
            if method == "ridge":
                fit = baselines.fit_ridge(ds, lam)
            else:
                a = 1.0 if method == "lasso" else alpha
                try:
                    fit = baselines.fit_elastic_net(ds, lam, a, initial_beta=beta)
                except MaxSweepsExceeded as exc:
                    fit = exc.result
                fit.method = method
            fits[i] = fit
            beta = fit.beta
        return fits

    return fit_path


def _resolve_fitter(fitter, grid, p):
    if callable(fitter):
        return fitter
    if fitter == "horses":
        grid.check(p)
        return make_fitter("horses", d=grid.d)
    return make_fitter(fitter)


# ----------------------------------------------------------------------------
# results


@dataclass
class TuningResult:
    criterion: Criterion
    alphas: np.ndarray
    lambdas: np.ndarray
    score_surface: np.ndarray
    best_alpha: float
    best_lambda: float
    best_index: tuple
    seed: int | None = None
    folds: list | None = None
    fit: FitResult | None = None
    report: StandardizationReport | None = None
    raw_beta: np.ndarray | None = None
    intercept: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "criterion": self.criterion.value,
            "best_alpha": self.best_alpha,
            "best_lambda": self.best_lambda,
            "best_index": [int(i) for i in self.best_index],
            "seed": self.seed,
            "alphas": [float(a) for a in self.alphas],
            "lambdas": [[float(v) for v in row] for row in self.lambdas],
            "score_surface": [[float(v) for v in row] for row in self.score_surface],
        }
        if self.folds is not None:
            out["folds"] = [[int(i) for i in f] for f in self.folds]
        return out


def select_best(scores: np.ndarray, alphas, lambdas: np.ndarray) -> tuple:
    """Index of the minimal score; ties go to the larger lambda, then the larger alpha."""
    scores = np.asarray(scores, dtype=float)
    finite = np.isfinite(scores)
    if not finite.any():
        raise EmptyGridError("no grid point produced a finite score")
    best = scores[finite].min()
    cand = [(lambdas[i, j], alphas[i], i, j) for i, j in zip(*np.nonzero(finite & (scores == best)))]
    _, _, i, j = max(cand)
    return int(i), int(j)


def _finish(criterion, grid, lam_table, scores, fits, report, seed=None, folds=None):
    alphas = np.array(grid.alphas)
    i, j = select_best(scores, alphas, lam_table)
    fit = fits[i][j] if fits is not None else None
    res = TuningResult(criterion, alphas, lam_table, scores, float(alphas[i]), float(lam_table[i, j]),
                       (i, j), seed, folds, fit, report)
    if fit is not None:
        res.raw_beta, res.intercept = destandardize(fit.beta, report)
    if fits is not None:
        flat = [f for row in fits for f in row]
        res.extra["max_kkt_residual"] = max(float(f.kkt_residual) for f in flat)
        res.extra["all_monotone"] = all(f.monotone for f in flat)
        res.extra["all_converged"] = all(f.converged for f in flat)
    return res


def _fit_grid(std: Dataset, grid, lam_table, fit_path):
    return [fit_path(std, a, lam_table[i]) for i, a in enumerate(grid.alphas)]


def _predict(fit, report, raw_x):
    raw_beta, intercept = destandardize(fit.beta, report)
    return intercept + raw_x @ raw_beta


# ----------------------------------------------------------------------------
# selectors


def fold_assignment(n: int, k: int, seed: int) -> list:
    """Seeded shuffle of ``0..n-1`` cut into ``k`` contiguous blocks (sizes differ by at most 1)."""
    if not (2 <= k <= n):
        raise BadKError(f"need 2 <= k <= n={n}, got k={k}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(block) for block in np.array_split(perm, k)]


def kfold_cv(dataset: Dataset, grid: TuningGrid, k: int, seed: int = 0, fitter="horses") -> TuningResult:
    """Sum over folds of held-out squared prediction error, for every grid point.

    The lambda table is derived once from the full standardized data so
    every fold fits the same grid.  The returned fit is the full-data fit at
    the selected point.
    """
    folds = fold_assignment(dataset.n, k, seed)
    std, report = standardize(dataset.x, dataset.y)
    fit_path = _resolve_fitter(fitter, grid, dataset.p)
    lam_table = grid.lambda_table(std)
    scores = np.zeros(lam_table.shape)
    for hold in folds:
        train_rows = np.setdiff1d(np.arange(dataset.n), hold)
        f_std, f_rep = standardize(dataset.x[train_rows], dataset.y[train_rows])
        fits = _fit_grid(f_std, grid, lam_table, fit_path)
        xh, yh = dataset.x[hold], dataset.y[hold]
        for i, row in enumerate(fits):
            for j, fit in enumerate(row):
                r = yh - _predict(fit, f_rep, xh)
                scores[i, j] += float(r @ r)
    full = _fit_grid(std, grid, lam_table, fit_path)
    return _finish(Criterion.CV, grid, lam_table, scores, full, report, seed, folds)


def information_criterion(dataset: Dataset, grid: TuningGrid, criterion="gcv", fitter="horses") -> TuningResult:
    """Select by GCV or BIC using in-sample RSS and group-count df on the full data.

    Grid points where the criterion is undefined (df >= n for GCV, RSS = 0
    for BIC) score ``inf``.
    """
    criterion = Criterion(criterion)
    if criterion not in (Criterion.GCV, Criterion.BIC):
        raise ValueError("criterion must be gcv or bic")
    std, report = standardize(dataset.x, dataset.y)
    fit_path = _resolve_fitter(fitter, grid, dataset.p)
    lam_table = grid.lambda_table(std)
    fits = _fit_grid(std, grid, lam_table, fit_path)
    scores = np.full(lam_table.shape, np.inf)
    n = dataset.n
    for i, row in enumerate(fits):
        for j, fit in enumerate(row):
            r = std.y - std.x @ fit.beta
            rss = float(r @ r)
            df = degrees_of_freedom(fit)
            try:
                scores[i, j] = gcv(rss, n, df) if criterion == Criterion.GCV else bic(rss, n, df)
            except (DfTooLargeError, NonpositiveRSSError):
                pass
    return _finish(criterion, grid, lam_table, scores, fits, report)


def validation_pe(train: Dataset, valid: Dataset, grid: TuningGrid, fitter="horses") -> TuningResult:
    """Fit every grid point on ``train`` and score squared prediction error on ``valid``.

    The returned ``fit`` is the training-set fit at the selected point.
    """
    if train.p != valid.p:
        raise DimensionMismatchError(f"train has p={train.p}, valid has p={valid.p}")
    std, report = standardize(train.x, train.y)
    fit_path = _resolve_fitter(fitter, grid, train.p)
    lam_table = grid.lambda_table(std)
    fits = _fit_grid(std, grid, lam_table, fit_path)
    scores = np.empty(lam_table.shape)
    for i, row in enumerate(fits):
        for j, fit in enumerate(row):
            r = valid.y - _predict(fit, report, valid.x)
            scores[i, j] = float(r @ r)
    return _finish(Criterion.VALIDATION_PE, grid, lam_table, scores, fits, report)
