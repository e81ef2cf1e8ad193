"""HORSES objective and its modified pathwise coordinate descent.

The solver alternates cyclic descent sweeps with pair fusion moves.  Two
extra moves keep it from stalling on the non-separable penalty:

* polish: with the current tie/sign structure frozen the objective is a
  smooth quadratic in the group values, which is solved exactly;
* escape: a steepest-descent step along the negative minimum-norm
  subgradient, which also serves as the optimality certificate.

Every move is accepted only if it lowers the objective, and all line
searches are exact (the objective is convex and piecewise quadratic along
any line).
"""

from __future__ import annotations

import dataclasses
import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels as K
from .data import (
    Dataset,
    FitResult,
    PenaltySpec,
    group_extract,
    pairwise_abs_sum,
)
from .exceptions import (
    AlphaOneError,
    DimensionMismatchError,
    InfeasibleTError,
    InvalidPenaltyError,
    MaxSweepsExceeded,
)
from .prox import fusion_prox

# coefficients closer than this (relative to the largest magnitude) are treated as tied
TIE_RTOL = 1e-11


class FusionPairStrategy(str, enum.Enum):
    ALL_PAIRS = "all_pairs"
    SORTED_ADJACENT = "sorted_adjacent"


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SolverConfig:
    max_sweeps: int = 10000
    objective_tol: float = 1e-9
    kkt_tol: float = 1e-6
    fusion_pair_strategy: FusionPairStrategy = FusionPairStrategy.ALL_PAIRS
    initial_beta: np.ndarray | None = None
    polish: bool = True
    escape: bool = True

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not (self.objective_tol > 0 and self.kkt_tol > 0):
            raise ValueError("tolerances must be positive")
        object.__setattr__(
            self, "fusion_pair_strategy", FusionPairStrategy(self.fusion_pair_strategy)
        )


def _check(dataset: Dataset, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size != dataset.p:
        raise DimensionMismatchError(f"beta has length {beta.size}, dataset has p={dataset.p}")
    return beta


def objective(dataset: Dataset, beta, penalty: PenaltySpec) -> float:
    """``0.5*||y - X b||^2 + lambda1*sum|b_j| + lambda2*sum_{j<k}|b_j - b_k|``."""
    beta = _check(dataset, beta)
    r = dataset.y - dataset.x @ beta
    return _objective_from_residual(r, beta, penalty.lambda1, penalty.lambda2)


def _objective_from_residual(r, beta, lam1, lam2):
    return 0.5 * float(r @ r) + lam1 * float(np.abs(beta).sum()) + lam2 * pairwise_abs_sum(beta)


def lambda_max(dataset: Dataset, alpha: float) -> float:
    """A lambda at or above which the fitted coefficients are identically zero.

    At ``alpha = 1`` this is the exact LASSO null threshold ``max|x_j^T y|``;
    for smaller alpha the fusion term only helps keep zero optimal.
    """
    if alpha <= 0:
        raise InvalidPenaltyError("alpha must be positive for a finite lambda_max")
    return float(np.abs(dataset.x.T @ dataset.y).max()) / alpha


def grouping_bound(y_norm: float, rho_kl: float, alpha: float) -> float:
    """Lambda above which two predictors with correlation ``rho_kl`` are fused.

    ``||y|| * sqrt(2*(1 - rho)) / (1 - alpha)``, valid when both coefficients
    are distinct from every other coefficient.
    """
    if not -1.0 <= rho_kl <= 1.0:
        raise ValueError(f"rho_kl must lie in [-1, 1], got {rho_kl}")
    if alpha >= 1.0:
        raise AlphaOneError("the grouping bound is undefined at alpha = 1")
    return y_norm * math.sqrt(2.0 * (1.0 - rho_kl)) / (1.0 - alpha)


# ----------------------------------------------------------------------------
# tie structure, certificate and KKT residual


def _tie_tol(beta):
    return TIE_RTOL * max(1.0, float(np.abs(beta).max(initial=0.0)))


def _blocks(beta, tol):
    """Cluster coefficients into tie blocks.

    Returns ``(labels, values, below, above)`` where ``values[b]`` is the block
    value (exactly 0 for the zero block) and ``below``/``above`` count the
    coordinates in strictly lower/higher blocks.
    """
    p = beta.size
    order = np.argsort(beta, kind="stable")
    sb = beta[order]
    new_block = np.empty(p, dtype=bool)
    new_block[0] = True
    new_block[1:] = np.diff(sb) > tol
    block_of_sorted = np.cumsum(new_block) - 1
    labels = np.empty(p, dtype=int)
    labels[order] = block_of_sorted
    nb = int(block_of_sorted[-1]) + 1
    sizes = np.bincount(labels, minlength=nb)
    values = np.bincount(labels, weights=beta, minlength=nb) / sizes
    values[np.abs(values) <= tol] = 0.0
    first = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    below = first[labels]
    above = p - first[labels] - sizes[labels]
    return labels, values, below, above


def _fixed_subgradient(grad, beta, lam1, lam2, tol):
    labels, values, below, above = _blocks(beta, tol)
    fixed = grad + lam1 * np.sign(values[labels]) + lam2 * (below - above)
    return fixed, labels, values


def steepest_direction(grad, beta, lam1, lam2, tol=None):
    """Negative minimum-norm subgradient of the objective at ``beta``.

    ``grad`` is the gradient of the smooth part.  Blocks of tied coefficients
    contribute free subgradient terms; the minimum-norm element over each
    block is the prox of the block's homogeneous penalty.
    """
    tol = _tie_tol(beta) if tol is None else tol
    fixed, labels, values = _fixed_subgradient(grad, beta, lam1, lam2, tol)
    v = np.zeros_like(beta)
    for b in range(values.size):
        idx = np.flatnonzero(labels == b)
        v[idx] = fusion_prox(-fixed[idx], lam1 if values[b] == 0.0 else 0.0, lam2)
    return v


def kkt_residual(dataset: Dataset, beta, penalty: PenaltySpec, tol=None) -> float:
    """Largest coordinate-wise distance from 0 to the subdifferential of the objective.

    For coordinate ``k`` the interval is ``fixed_k +/- (lambda1*a_k + lambda2*b_k)``
    where ``fixed_k`` collects the smooth gradient and all terms with a
    determined sign, ``a_k`` is 1 when ``beta_k`` is zero and ``b_k`` counts
    the other coefficients tied with ``beta_k``.
    """
    beta = _check(dataset, beta)
    tol = _tie_tol(beta) if tol is None else tol
    grad = -(dataset.x.T @ (dataset.y - dataset.x @ beta))
    lam1, lam2 = penalty.lambda1, penalty.lambda2
    fixed, labels, values = _fixed_subgradient(grad, beta, lam1, lam2, tol)
    sizes = np.bincount(labels)
    radius = lam1 * (values[labels] == 0.0) + lam2 * (sizes[labels] - 1)
    return float(np.maximum(np.abs(fixed) - radius, 0.0).max())


def optimality_gap(dataset: Dataset, beta, penalty: PenaltySpec) -> float:
    """Max-norm of the minimum-norm subgradient; zero exactly at the optimum."""
    beta = _check(dataset, beta)
    grad = -(dataset.x.T @ (dataset.y - dataset.x @ beta))
    v = steepest_direction(grad, beta, penalty.lambda1, penalty.lambda2)
    return float(np.abs(v).max(initial=0.0))


# ----------------------------------------------------------------------------
# exact line search


def line_search(x, y, beta, v, lam1, lam2):
    """Exactly minimize the objective along ``beta + t*v`` for ``t >= 0``.

    Returns the new point; coordinates that meet (or reach zero) at the
    chosen breakpoint are snapped to exactly equal (or zero) values.
    """
    beta = np.ascontiguousarray(beta, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    r = y - x @ beta
    xv = x @ v
    t, at_break = K.line_search_step(beta, v, -float(r @ xv), float(xv @ xv), lam1, lam2)
    if t <= 0:
        return beta.copy()
    new = beta + t * v
    return K.snap(beta, v, t, new) if at_break else new


# ----------------------------------------------------------------------------
# public single moves


def descent_step(dataset: Dataset, beta, k: int, penalty: PenaltySpec):
    """Exactly minimize the objective over ``beta[k]`` with the rest fixed.

    Returns ``(new_beta_k, improved)``; when the move does not lower the
    objective the current value is returned with ``improved=False``.
    """
    beta = _check(dataset, beta).copy()
    if not 0 <= k < dataset.p:
        raise IndexError(f"coordinate {k} out of range for p={dataset.p}")
    x = dataset.x
    G = x.T @ x
    c = x.T @ (dataset.y - x @ beta)
    b, phi_new, phi_old = K.coordinate_update(G, c, beta, k, penalty.lambda1, penalty.lambda2)
    if phi_new < phi_old:
        return float(b), True
    return float(beta[k]), False


def fusion_step(
    dataset: Dataset,
    beta,
    penalty: PenaltySpec,
    strategy: FusionPairStrategy = FusionPairStrategy.ALL_PAIRS,
):
    """Apply the single best strictly improving move ``beta_k = beta_l = gamma``.

    Returns ``(new_beta, accepted)``.
    """
    beta = _check(dataset, beta).copy()
    x = dataset.x
    G = x.T @ x
    c = x.T @ (dataset.y - x @ beta)
    f0 = objective(dataset, beta, penalty)
    new, ok = _fusion(G, c, beta, penalty.lambda1, penalty.lambda2, strategy, f0)
    if not ok:
        return beta, False
    if objective(dataset, new, penalty) < f0:
        return new, True
    return beta, False


def _fusion(G, c, beta, lam1, lam2, strategy, f0):
    if beta.size < 2:
        return beta, False
    k, l, gamma, delta = K.fusion_scan(
        G, c, beta, lam1, lam2, strategy == FusionPairStrategy.SORTED_ADJACENT
    )
    if k < 0 or not delta < -1e-14 * max(1.0, abs(f0)):
        return beta, False
    new = beta.copy()
    new[k] = new[l] = gamma
    return new, True


def _structure(G, xty, beta, lam1, lam2, tol):
    """Reduced quadratic ``0.5*t^T A t - rhs^T t`` over the nonzero block values.

    With the tie/sign structure frozen the objective is smooth in the block
    values ``t``.  Returns ``(labels, nz, A, rhs, lin)`` or ``None`` when every
    coefficient is zero; ``lin`` is the frozen penalty gradient in ``t`` and
    ``nz`` lists the block ids that ``t`` refers to.
    """
    labels, values, below, above = _blocks(beta, tol)
    nz = np.flatnonzero(values != 0.0)
    if nz.size == 0:
        return None
    # blocks are contiguous in sorted order, so block sums are reduceat calls
    order = np.argsort(labels, kind="stable")
    starts = np.flatnonzero(np.r_[True, np.diff(labels[order]) != 0])
    Gs = G[np.ix_(order, order)]
    A = np.add.reduceat(np.add.reduceat(Gs, starts, axis=0), starts, axis=1)[np.ix_(nz, nz)]
    lin = np.add.reduceat((lam1 * np.sign(values[labels]) + lam2 * (below - above))[order], starts)[nz]
    xt = np.add.reduceat(xty[order], starts)[nz]
    return labels, nz, A, xt - lin, lin


def _expand(labels, nz, t, nb):
    full = np.zeros(nb)
    full[nz] = t
    return full[labels]


def _cholesky(A):
    """Cholesky factor of ``A`` if it is comfortably positive definite, else ``None``."""
    try:
        chol = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return None
    if float(np.diag(chol).min()) ** 2 <= 1e-8 * max(1.0, float(np.diag(A).max())):
        return None
    return chol


def _polish_target(G, xty, beta, lam1, lam2, tol):
    """Exact minimizer of the objective with the current tie/sign structure frozen."""
    red = _structure(G, xty, beta, lam1, lam2, tol)
    if red is None:
        return None
    labels, nz, A, rhs, _ = red
    chol = _cholesky(A)
    if chol is not None:
        t = scipy.linalg.cho_solve((chol, True), rhs)
    else:
        t = np.linalg.lstsq(A, rhs, rcond=None)[0]
    return _expand(labels, nz, t, labels.max() + 1)


def _null_direction(G, xty, beta, lam1, lam2, tol):
    """A direction that keeps the fit and strictly lowers the frozen penalty, if any.

    When the reduced system is singular the loss is flat along its null
    space while the penalty is linear there; moving against the penalty
    gradient until a coefficient meets zero (or another block) shrinks the
    structure.
    """
    red = _structure(G, xty, beta, lam1, lam2, tol)
    if red is None:
        return None
    labels, nz, A, _, lin = red
    if _cholesky(A) is not None:
        return None
    w, V = np.linalg.eigh(A)
    null = V[:, w <= 1e-10 * max(1.0, float(w[-1]))]
    if null.shape[1] == 0:
        return None
    d = -null @ (null.T @ lin)
    if np.linalg.norm(d) <= 1e-12 * max(1.0, np.linalg.norm(lin)):
        return None
    return _expand(labels, nz, d, labels.max() + 1)


# ----------------------------------------------------------------------------
# driver


class _Tracker:
    def __init__(self, dataset, penalty, beta):
        self.x, self.y = dataset.x, dataset.y
        self.lam1, self.lam2 = penalty.lambda1, penalty.lambda2
        self.G = self.x.T @ self.x
        self.xty = self.x.T @ self.y
        self.beta = beta
        self.f = self.value(beta)
        self.trace = [self.f]

    def value(self, beta):
        return _objective_from_residual(self.y - self.x @ beta, beta, self.lam1, self.lam2)

    def grad(self):
        return self.G @ self.beta - self.xty

    def c(self):
        return self.xty - self.G @ self.beta

    def offer(self, new):
        """Accept ``new`` if it lowers the objective."""
        f_new = self.value(new)
        if f_new < self.f:
            self.beta, self.f = new, f_new
            self.trace.append(f_new)
            return True
        return False


def solve(dataset: Dataset, penalty: PenaltySpec, config: SolverConfig | None = None) -> FitResult:
    """Minimize the HORSES objective on a standardized dataset.

    Raises :class:`MaxSweepsExceeded` (carrying the best result) when the
    sweep budget runs out before the optimality certificate is met.
    """
    config = config or SolverConfig()
    penalty.check(dataset.p)
    lam1, lam2 = penalty.lambda1, penalty.lambda2
    if config.initial_beta is not None:
        beta0 = _check(dataset, config.initial_beta).copy()
    else:
        beta0 = np.zeros(dataset.p)
    st = _Tracker(dataset, penalty, beta0)
    sweeps = fusions = 0
    converged = stuck = False
    while sweeps < config.max_sweeps:
        beta = st.beta.copy()
        c = st.c()
        K.descent_sweep(st.G, c, beta, lam1, lam2)
        sweeps += 1
        f_before = st.f
        st.offer(beta)
        if f_before - st.f > config.objective_tol * abs(f_before):
            if config.polish:
                _try_polish(st)
            continue
        # the sweep stalled: try the structural moves
        tol = _tie_tol(st.beta)
        if config.polish:
            _try_polish(st, tol)
        if _gap(st) <= config.kkt_tol:
            converged = True
            break
        new, ok = _fusion(st.G, st.c(), st.beta, lam1, lam2, config.fusion_pair_strategy, st.f)
        if ok and st.offer(new):
            fusions += 1
            continue
        if config.escape:
            v = steepest_direction(st.grad(), st.beta, lam1, lam2)
            if np.any(v) and st.offer(line_search(st.x, st.y, st.beta, v, lam1, lam2)):
                continue
        if f_before - st.f <= 0:
            stuck = True
            break
    result = _make_result(dataset, penalty, st, sweeps, fusions, converged)
    if not converged:
        if stuck:
            warnings.warn(
                f"solver stalled with optimality gap {result.optimality_gap:.3g}",
                ConvergenceWarning,
                stacklevel=2,
            )
            return result
        raise MaxSweepsExceeded(f"no convergence after {sweeps} sweeps", result)
    return result


def _try_polish(st, tol=None):
    # shrink a degenerate structure first; each accepted move removes a block
    for _ in range(st.beta.size):
        v = _null_direction(st.G, st.xty, st.beta, st.lam1, st.lam2, _tie_tol(st.beta))
        if v is None or not st.offer(line_search(st.x, st.y, st.beta, v, st.lam1, st.lam2)):
            break
    tol = _tie_tol(st.beta)
    target = _polish_target(st.G, st.xty, st.beta, st.lam1, st.lam2, tol)
    if target is not None:
        st.offer(line_search(st.x, st.y, st.beta, target - st.beta, st.lam1, st.lam2))


def _gap(st):
    v = steepest_direction(st.grad(), st.beta, st.lam1, st.lam2)
    return float(np.abs(v).max(initial=0.0))


def _make_result(dataset, penalty, st, sweeps, fusions, converged):
    beta = st.beta
    groups = group_extract(beta)
    trace = st.trace
    scale = max(1.0, abs(trace[0]))
    monotone = bool(np.all(np.diff(trace) <= 1e-12 * scale))
    return FitResult(
        beta=beta,
        groups=groups,
        objective=objective(dataset, beta, penalty),
        df=groups.df,
        iterations=sweeps,
        fusion_moves_accepted=fusions,
        converged=converged,
        kkt_residual=kkt_residual(dataset, beta, penalty),
        method="horses",
        penalty=penalty,
        optimality_gap=_gap(st),
        trace=trace,
        monotone=monotone,
    )


def solve_path(
    dataset: Dataset,
    alpha: float,
    lambdas,
    config: SolverConfig | None = None,
    d: float | None = None,
    raise_on_failure: bool = False,
) -> list[FitResult]:
    """Fit a descending lambda path, warm-starting each fit from the previous one."""
    config = config or SolverConfig()
    lambdas = np.asarray(lambdas, dtype=float)
    order = np.argsort(-lambdas, kind="stable")
    fits: list = [None] * lambdas.size
    beta = config.initial_beta
    for i in order:
        cfg = dataclasses.replace(config, initial_beta=beta)
        try:
            fit = solve(dataset, PenaltySpec(alpha, float(lambdas[i]), d), cfg)
        except MaxSweepsExceeded as exc:
            if raise_on_failure:
                raise
            fit = exc.result
        fits[i] = fit
        beta = fit.beta
    return fits


def constraint_to_lagrangian(
    dataset: Dataset,
    alpha: float,
    t: float,
    d: float | None = None,
    config: SolverConfig | None = None,
    rtol: float = 1e-6,
) -> PenaltySpec:
    """Find lambda whose solution meets the constraint-form budget ``t`` with equality.

    Bisection on lambda over ``[0, lambda_max]``; the penalty value of the
    solution is nonincreasing in lambda.  Returns lambda = 0 when the budget
    does not bind at the unpenalized solution.
    """
    if t < 0:
        raise InfeasibleTError(f"t must be >= 0, got {t}")
    base = PenaltySpec(alpha, 0.0, d).check(dataset.p)
    config = config or SolverConfig()
    lmax = lambda_max(dataset, alpha)
    if t == 0:
        return base.with_lambda(lmax)
    unpen = solve(dataset, base, config)
    if base.penalty_value(unpen.beta) <= t:
        return base
    lo, hi = 0.0, lmax
    beta = unpen.beta
    best = base.with_lambda(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        cfg = dataclasses.replace(config, initial_beta=beta)
        fit = solve(dataset, base.with_lambda(mid), cfg)
        val = base.penalty_value(fit.beta)
        if abs(val - t) <= rtol * t:
            return base.with_lambda(mid)
        if val > t:
            lo = mid
        else:
            hi = mid
            best = base.with_lambda(mid)
        beta = fit.beta
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return best
