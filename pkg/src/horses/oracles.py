"""Slow reference solvers used to check the coordinate-descent solver.

Nothing here uses coordinate moves or fusion moves, so agreement with
:func:`horses.solver.solve` is independent evidence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .data import Dataset, FitResult, PenaltySpec, group_extract, pairwise_abs_sum
from .exceptions import InstanceTooLargeError, MaxItersExceeded, WrongDimensionError
from .prox import fusion_prox

MAX_N, MAX_P = 100, 20
MAX_FLSA = 50


class StepRule(str, enum.Enum):
    DIMINISHING_SUBGRADIENT = "diminishing_subgradient"
    PROXIMAL_FIXED_STEP = "proximal_fixed_step"


@dataclass(frozen=True)
class OracleConfig:
    max_iters: int = 2_000_000
    step_rule: StepRule = StepRule.PROXIMAL_FIXED_STEP
    tol: float = 1e-9
    window: int = 1000

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        object.__setattr__(self, "step_rule", StepRule(self.step_rule))


def _f(x, y, beta, lam1, lam2):
    r = y - x @ beta
    return 0.5 * float(r @ r) + lam1 * float(np.abs(beta).sum()) + lam2 * pairwise_abs_sum(beta)


def power_iteration(G, iters=1000, rtol=1e-12):
    """Largest eigenvalue of a symmetric PSD matrix."""
    # a generic start vector; all-ones can be orthogonal to the top eigenvector
    v = np.random.default_rng(0).standard_normal(G.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = G @ v
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        new = float(v @ G @ v)
        if abs(new - lam) <= rtol * max(new, 1e-300):
            return new
        lam = new
    return lam


def _proximal(x, y, lam1, lam2, cfg):
    """Accelerated proximal gradient with function-value restarts."""
    G = x.T @ x
    xty = x.T @ y
    # a hair above the top eigenvalue keeps the step safely inside 1/L
    L = max(power_iteration(G) * (1 + 1e-6), 1e-12)
    beta = np.zeros(x.shape[1])
    z = beta.copy()
    tk = 1.0
    f_cur = _f(x, y, beta, lam1, lam2)
    best, best_f = beta.copy(), f_cur
    history = [best_f]
    last_check = best_f
    for it in range(1, cfg.max_iters + 1):
        grad = G @ z - xty
        nxt = fusion_prox(z - grad / L, lam1 / L, lam2 / L)
        f_nxt = _f(x, y, nxt, lam1, lam2)
        if f_nxt > f_cur:
            if tk == 1.0:
                # a plain prox step failed: either we are at the optimum or L is too small
                if f_nxt - f_cur <= 1e-12 * max(1.0, abs(f_cur)):
                    return best, best_f, it, True, history
                L *= 2.0
            tk = 1.0
            z = beta.copy()
        else:
            t_next = 0.5 * (1 + np.sqrt(1 + 4 * tk * tk))
            z = nxt + ((tk - 1) / t_next) * (nxt - beta)
            beta, f_cur, tk = nxt, f_nxt, t_next
            if f_cur < best_f:
                best, best_f = beta.copy(), f_cur
        history.append(best_f)
        if it % cfg.window == 0:
            if last_check - best_f <= cfg.tol:
                return best, best_f, it, True, history
            last_check = best_f
    return best, best_f, cfg.max_iters, False, history


def _subgradient(x, y, lam1, lam2, cfg):
    """Subgradient descent with step ``1/(L*sqrt(i))``, tracking the best iterate."""
    G = x.T @ x
    xty = x.T @ y
    L = max(power_iteration(G), 1e-12)
    p = x.shape[1]
    beta = np.zeros(p)
    best, best_f = beta.copy(), _f(x, y, beta, lam1, lam2)
    history = [best_f]
    last_check = best_f
    for it in range(1, cfg.max_iters + 1):
        diff = np.sign(beta[:, None] - beta[None, :]).sum(axis=1)
        g = G @ beta - xty + lam1 * np.sign(beta) + lam2 * diff
        beta = beta - g / (L * np.sqrt(it))
        f = _f(x, y, beta, lam1, lam2)
        if f < best_f:
            best, best_f = beta.copy(), f
        history.append(best_f)
        if it % cfg.window == 0:
            if last_check - best_f <= cfg.tol:
                return best, best_f, it, True, history
            last_check = best_f
    return best, best_f, cfg.max_iters, False, history


def _run(x, y, lam1, lam2, cfg, penalty):
    if cfg.step_rule == StepRule.PROXIMAL_FIXED_STEP:
        beta, f, iters, ok, history = _proximal(x, y, lam1, lam2, cfg)
    else:
        beta, f, iters, ok, history = _subgradient(x, y, lam1, lam2, cfg)
    groups = group_extract(beta)
    result = FitResult(
        beta=beta,
        groups=groups,
        objective=f,
        df=groups.df,
        iterations=iters,
        converged=ok,
        method=f"oracle:{cfg.step_rule.value}",
        penalty=penalty,
        trace=history,
        monotone=bool(np.all(np.diff(history) <= 0)),
    )
    if not ok:
        raise MaxItersExceeded(f"oracle did not settle within {iters} iterations", result)
    return result


def oracle_solve(dataset: Dataset, penalty: PenaltySpec, config: OracleConfig | None = None) -> FitResult:
    """Minimize the HORSES objective with a generic first-order method (desk scale only)."""
    if dataset.n > MAX_N or dataset.p > MAX_P:
        raise InstanceTooLargeError(f"oracle limited to n <= {MAX_N}, p <= {MAX_P}")
    cfg = config or OracleConfig()
    return _run(dataset.x, dataset.y, penalty.lambda1, penalty.lambda2, cfg, penalty)


def flsa_1d(y_signal, lambda1: float, lambda2: float, config: OracleConfig | None = None) -> np.ndarray:
    """All-pairs signal approximator: the HORSES problem with identity design."""
    y_signal = np.asarray(y_signal, dtype=float).ravel()
    if y_signal.size > MAX_FLSA:
        raise InstanceTooLargeError(f"flsa_1d limited to length <= {MAX_FLSA}")
    cfg = config or OracleConfig()
    x = np.eye(y_signal.size)
    return _run(x, y_signal, lambda1, lambda2, cfg, PenaltySpec.from_lambdas(lambda1, lambda2)).beta


def _grid_values(G, xty, yty, lam1, lam2, b1, b2):
    B1, B2 = np.meshgrid(b1, b2, indexing="ij")
    quad = G[0, 0] * B1**2 + 2 * G[0, 1] * B1 * B2 + G[1, 1] * B2**2
    smooth = 0.5 * (yty - 2 * (xty[0] * B1 + xty[1] * B2) + quad)
    return smooth + lam1 * (np.abs(B1) + np.abs(B2)) + lam2 * np.abs(B1 - B2)


def grid_solve_2d(
    dataset: Dataset,
    penalty: PenaltySpec,
    lo: float,
    hi: float,
    step: float,
    refine: int = 0,
):
    """Exhaustive grid minimization for ``p = 2``.

    ``refine`` adds zoom levels: each level re-grids a window of +/-20 steps
    around the current argmin with a 100x finer step.  Returns ``(beta, f)``.
    """
    if dataset.p != 2:
        raise WrongDimensionError(f"grid_solve_2d needs p = 2, got p = {dataset.p}")
    if not (hi > lo and step > 0) or (hi - lo) / step > 1e5:
        raise ValueError("need hi > lo and at most 1e5 grid steps per axis")
    x, y = dataset.x, dataset.y
    G, xty, yty = x.T @ x, x.T @ y, float(y @ y)
    lam1, lam2 = penalty.lambda1, penalty.lambda2
    axis = np.arange(lo, hi + step / 2, step)
    best_f, best = np.inf, None
    chunk = max(1, 4_000_000 // axis.size)
    for s in range(0, axis.size, chunk):
        vals = _grid_values(G, xty, yty, lam1, lam2, axis[s : s + chunk], axis)
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[i, j] < best_f:
            best_f, best = float(vals[i, j]), np.array([axis[s + i], axis[j]])
    for _ in range(refine):
        window = 20 * step
        step = step / 100
        a1 = np.arange(best[0] - window, best[0] + window + step / 2, step)
        a2 = np.arange(best[1] - window, best[1] + window + step / 2, step)
        vals = _grid_values(G, xty, yty, lam1, lam2, a1, a2)
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[i, j] <= best_f:
            best_f, best = float(vals[i, j]), np.array([a1[i], a2[j]])
    # report the objective evaluated directly at the returned point
    return best, _f(x, y, best, lam1, lam2)
