"""Ridge, LASSO and Elastic Net under the half-loss Lagrangian convention.

* ridge:        0.5*||y - Xb||^2 + lam*||b||^2
* lasso:        0.5*||y - Xb||^2 + lam*||b||_1
* elastic net:  0.5*||y - Xb||^2 + lam*alpha*||b||_1 + lam*(1 - alpha)*||b||^2
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels as K
from .data import Dataset, FitResult, group_extract
from .exceptions import InvalidPenaltyError, MaxSweepsExceeded, SingularSystemError


class Method(str, enum.Enum):
    RIDGE = "ridge"
    LASSO = "lasso"
    ELASTIC_NET = "enet"


@dataclass(frozen=True)
class BaselineSpec:
    method: Method
    lam: float
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.lam >= 0:
            raise InvalidPenaltyError("lambda must be >= 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidPenaltyError("alpha must lie in [0, 1]")

    def fit(self, dataset, initial_beta=None) -> FitResult:
        if self.method == Method.RIDGE:
            return fit_ridge(dataset, self.lam)
        if self.method == Method.LASSO:
            return fit_lasso(dataset, self.lam, initial_beta=initial_beta)
        return fit_elastic_net(dataset, self.lam, self.alpha, initial_beta=initial_beta)


def enet_objective(dataset: Dataset, beta, l1: float, l2: float) -> float:
    r = dataset.y - dataset.x @ beta
    return 0.5 * float(r @ r) + l1 * float(np.abs(beta).sum()) + l2 * float(beta @ beta)


def ridge_df(dataset: Dataset, lam: float) -> float:
    """``trace(X (X^T X + 2 lam I)^-1 X^T)`` via the singular values of X."""
    s = np.linalg.svd(dataset.x, compute_uv=False)
    return float(np.sum(s**2 / (s**2 + 2.0 * lam)))


def fit_ridge(dataset: Dataset, lam: float) -> FitResult:
    if lam < 0:
        raise InvalidPenaltyError("lambda must be >= 0")
    x, y = dataset.x, dataset.y
    A = x.T @ x + 2.0 * lam * np.eye(dataset.p)
    if lam == 0 and np.linalg.matrix_rank(x) < dataset.p:
        raise SingularSystemError("X is rank deficient; ridge needs lambda > 0")
    try:
        beta = scipy.linalg.solve(A, x.T @ y, assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularSystemError(str(exc)) from exc
    groups = group_extract(beta)
    return FitResult(
        beta=beta,
        groups=groups,
        objective=enet_objective(dataset, beta, 0.0, lam),
        df=groups.df,
        method="ridge",
    )


def _cd(dataset, l1, l2, method, initial_beta, max_sweeps, tol):
    x, y = dataset.x, dataset.y
    G = x.T @ x
    beta = np.zeros(dataset.p) if initial_beta is None else np.array(initial_beta, dtype=float)
    c = x.T @ y - G @ beta
    trace = [enet_objective(dataset, beta, l1, l2)]
    converged = False
    sweeps = 0
    while sweeps < max_sweeps:
        chg = K.enet_sweep(G, c, beta, l1, l2)
        sweeps += 1
        trace.append(enet_objective(dataset, beta, l1, l2))
        if chg <= tol:
            converged = True
            break
    groups = group_extract(beta)
    result = FitResult(
        beta=beta,
        groups=groups,
        objective=trace[-1],
        df=groups.df,
        iterations=sweeps,
        converged=converged,
        method=method,
        trace=trace,
        monotone=bool(np.all(np.diff(trace) <= 1e-12 * max(1.0, trace[0]))),
    )
    if not converged:
        raise MaxSweepsExceeded(f"{method} did not converge in {max_sweeps} sweeps", result)
    return result


def fit_lasso(dataset: Dataset, lam: float, initial_beta=None, max_sweeps=100000, tol=1e-10) -> FitResult:
    """Cyclic coordinate descent with soft-threshold updates."""
    if lam < 0:
        raise InvalidPenaltyError("lambda must be >= 0")
    return _cd(dataset, lam, 0.0, "lasso", initial_beta, max_sweeps, tol)


def fit_elastic_net(
    dataset: Dataset, lam: float, alpha: float, initial_beta=None, max_sweeps=100000, tol=1e-10
) -> FitResult:
    """Coordinate descent with update ``S(x_k^T r_k, lam*alpha) / (x_k^T x_k + 2*lam*(1-alpha))``."""
    BaselineSpec(Method.ELASTIC_NET, lam, alpha)
    return _cd(dataset, lam * alpha, lam * (1.0 - alpha), "enet", initial_beta, max_sweeps, tol)
