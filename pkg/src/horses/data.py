"""Core domain types: datasets, standardization, penalties, groups and fit results."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    ConstantColumnError,
    DimensionMismatchError,
    InvalidPenaltyError,
    NonFiniteInputError,
)

#: Absolute tolerance used to decide that two standardized coefficients are equal.
GROUP_TOL = 1e-8


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Design matrix ``x`` (n x p) and response ``y`` (n,).

    When ``standardized`` is true the columns of ``x`` are centered with unit
    sum of squares and ``y`` is centered.
    """

    x: np.ndarray
    y: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if y.ndim == 2 and y.shape[1] == 1:
            y = y[:, 0]
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or y.ndim != 1:
            raise DimensionMismatchError(f"expected 2-d x and 1-d y, got {x.shape} and {y.shape}")
        if x.shape[0] != y.shape[0]:
            raise DimensionMismatchError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
        if x.shape[0] < 2 or x.shape[1] < 1:
            raise DimensionMismatchError(f"need n >= 2 and p >= 1, got {x.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise NonFiniteInputError("x and y must be finite")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def subset(self, rows) -> "Dataset":
        return Dataset(self.x[rows], self.y[rows], standardized=False)


@dataclass(frozen=True)
class StandardizationReport:
    y_mean: float
    col_means: np.ndarray
    col_scales: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "col_means", _frozen(self.col_means))
        object.__setattr__(self, "col_scales", _frozen(self.col_scales))

    @classmethod
    def identity(cls, p: int) -> "StandardizationReport":
        return cls(0.0, np.zeros(p), np.ones(p))

    def apply(self, raw_x, raw_y=None):
        """Transform raw data with the stored means and scales."""
        xs = (np.asarray(raw_x, dtype=float) - self.col_means) / self.col_scales
        if raw_y is None:
            return xs
        return xs, np.asarray(raw_y, dtype=float) - self.y_mean


def standardize(raw_x, raw_y) -> tuple[Dataset, StandardizationReport]:
    """Center ``y`` and scale each column of ``x`` to zero mean and unit sum of squares.

    The column scale is the root of the centered sum of squares, not the
    standard deviation, so no ``n - 1`` divisor is involved.
    """
    raw = Dataset(raw_x, raw_y)
    col_means = raw.x.mean(axis=0)
    centered = raw.x - col_means
    col_scales = np.sqrt((centered**2).sum(axis=0))
    # a column is constant when its spread is at rounding level relative to its magnitude
    floor = 1e-12 * np.maximum(1.0, np.abs(raw.x).max(axis=0)) * math.sqrt(raw.n)
    bad = np.flatnonzero(col_scales <= floor)
    if bad.size:
        raise ConstantColumnError(int(bad[0]))
    y_mean = float(raw.y.mean())
    report = StandardizationReport(y_mean, col_means, col_scales)
    return Dataset(centered / col_scales, raw.y - y_mean, standardized=True), report


def destandardize(beta, report: StandardizationReport) -> tuple[np.ndarray, float]:
    """Map standardized-scale coefficients to raw-scale slopes and an intercept."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != report.col_scales.shape:
        raise DimensionMismatchError(
            f"beta has length {beta.size}, report expects {report.col_scales.size}"
        )
    raw_beta = beta / report.col_scales
    intercept = report.y_mean - float(raw_beta @ report.col_means)
    return raw_beta, intercept


@dataclass(frozen=True)
class PenaltySpec:
    """Lagrangian HORSES penalty ``lam * (alpha*L1 + (1-alpha)*pairwise fusion)``.

    ``d`` bounds the mixing parameter from below (``alpha >= 1/d``).  ``None``
    means "use sqrt(p)" and is resolved by :meth:`check`; ``math.inf`` removes
    the lower bound, which is how arbitrary ``(lambda1, lambda2)`` pairs are
    expressed.
    """

    alpha: float
    lam: float
    d: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise InvalidPenaltyError(f"lambda must be finite and >= 0, got {self.lam}")
        if not (0.0 <= self.alpha <= 1.0):
            raise InvalidPenaltyError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.d is not None and not self.d > 0:
            raise InvalidPenaltyError(f"d must be positive, got {self.d}")
        if self.d is not None and self.alpha < 1.0 / self.d - 1e-12:
            raise InvalidPenaltyError(f"alpha={self.alpha} is below 1/d={1.0 / self.d}")

    @classmethod
    def from_lambdas(cls, lambda1: float, lambda2: float) -> "PenaltySpec":
        if lambda1 < 0 or lambda2 < 0:
            raise InvalidPenaltyError("lambda1 and lambda2 must be nonnegative")
        lam = lambda1 + lambda2
        alpha = 1.0 if lam == 0 else lambda1 / lam
        return cls(alpha, lam, d=math.inf)

    @property
    def lambda1(self) -> float:
        return self.lam * self.alpha

    @property
    def lambda2(self) -> float:
        return self.lam * (1.0 - self.alpha)

    def resolved_d(self, p: int) -> float:
        return math.sqrt(p) if self.d is None else self.d

    def check(self, p: int) -> "PenaltySpec":
        d = self.resolved_d(p)
        if self.alpha < 1.0 / d - 1e-12:
            raise InvalidPenaltyError(f"alpha={self.alpha} is below 1/d={1.0 / d} for p={p}")
        return self

    def with_lambda(self, lam: float) -> "PenaltySpec":
        return PenaltySpec(self.alpha, lam, self.d)

    def penalty_value(self, beta) -> float:
        """Constraint-form penalty ``alpha*sum|b| + (1-alpha)*sum_{j<k}|b_j - b_k|``."""
        beta = np.asarray(beta, dtype=float)
        return self.alpha * float(np.abs(beta).sum()) + (1.0 - self.alpha) * pairwise_abs_sum(beta)


def pairwise_abs_sum(beta) -> float:
    """``sum_{j<k} |b_j - b_k|`` in O(p log p) via the sorted-rank identity."""
    b = np.sort(np.asarray(beta, dtype=float))
    p = b.size
    weights = 2.0 * np.arange(1, p + 1) - p - 1
    return float(weights @ b)


@dataclass(frozen=True)
class GroupStructure:
    """Partition of coefficient indices into equal-value groups plus the zero set.

    Indices are 0-based.  ``groups`` is a tuple of ``(value, members)`` pairs
    ordered by value.
    """

    groups: tuple
    zero_set: tuple
    tolerance: float = GROUP_TOL

    @property
    def df(self) -> int:
        return len(self.groups)

    def labels(self, p: int) -> np.ndarray:
        """Group id per coefficient: 0 for the zero set, 1..G for groups by value."""
        out = np.zeros(p, dtype=int)
        for gid, (_, members) in enumerate(self.groups, start=1):
            out[list(members)] = gid
        return out

    def to_dict(self):
        return {
            "groups": [{"value": v, "members": list(m)} for v, m in self.groups],
            "zero_set": list(self.zero_set),
            "tolerance": self.tolerance,
        }


def group_extract(beta, tolerance: float = GROUP_TOL) -> GroupStructure:
    """Group coefficients by value.

    Coefficients with ``|b| <= tolerance`` form the zero set.  The rest are
    sorted and consecutive values whose gap is at most ``tolerance`` are
    merged (single linkage on the line).  Grouping is by value, not by
    adjacency of indices.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    beta = np.asarray(beta, dtype=float).ravel()
    zero = np.flatnonzero(np.abs(beta) <= tolerance)
    nz = np.flatnonzero(np.abs(beta) > tolerance)
    groups = []
    if nz.size:
        order = nz[np.argsort(beta[nz], kind="stable")]
        vals = beta[order]
        cuts = np.flatnonzero(np.diff(vals) > tolerance) + 1
        for chunk in np.split(order, cuts):
            members = tuple(sorted(int(i) for i in chunk))
            groups.append((float(beta[list(members)].mean()), members))
    return GroupStructure(tuple(groups), tuple(int(i) for i in zero), tolerance)


@dataclass
class FitResult:
    beta: np.ndarray
    groups: GroupStructure
    objective: float
    df: int
    iterations: int = 0
    fusion_moves_accepted: int = 0
    converged: bool = True
    kkt_residual: float = 0.0
    method: str = "horses"
    penalty: object = None
    optimality_gap: float = 0.0
    trace: list = field(default_factory=list)
    monotone: bool = True

    def to_dict(self):
        out = {
            "method": self.method,
            "beta": [float(b) for b in self.beta],
            "groups": self.groups.to_dict(),
            "df": int(self.df),
            "objective": float(self.objective),
            "iterations": int(self.iterations),
            "fusion_moves_accepted": int(self.fusion_moves_accepted),
            "converged": bool(self.converged),
            "kkt_residual": float(self.kkt_residual),
        }
        if isinstance(self.penalty, PenaltySpec):
            out["penalty"] = {
                "alpha": self.penalty.alpha,
                "lambda": self.penalty.lam,
                "lambda1": self.penalty.lambda1,
                "lambda2": self.penalty.lambda2,
            }
        return out
