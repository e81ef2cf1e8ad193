"""Six benchmark generative models and a replication harness.

Random numbers come from numpy's ``PCG64`` bit generator
(``numpy.random.default_rng(seed)``) with the ziggurat normal sampler, so
replicates are reproducible on any platform with the same numpy major
version.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .exceptions import BadModelIdError, DimensionMismatchError, HorsesError
from .tuning import TuningGrid, validation_pe

MODEL_IDS = (1, 2, 3, 4, 5, 6)
METHODS = ("horses", "lasso", "enet", "ridge")

# model 5: three latent factors plus N(0, 0.16) noise, rescaled to unit variance
_M5_NOISE_VAR = 0.16
_M5_SCALE = 1.0 / math.sqrt(1.0 + _M5_NOISE_VAR)


class CovKind(str, enum.Enum):
    AR1 = "ar1"
    COMPOUND_SYMMETRY = "compound_symmetry"
    THREE_BLOCK = "three_block"


@dataclass(frozen=True, eq=False)
class SimModelSpec:
    model_id: int
    n: int
    p: int
    sigma: float
    cov_kind: CovKind
    beta_true: np.ndarray
    v_matrix: np.ndarray

    def __post_init__(self):
        if self.beta_true.shape != (self.p,) or self.v_matrix.shape != (self.p, self.p):
            raise DimensionMismatchError("beta_true / v_matrix do not match p")


def _ar1(p, rho):
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def _model5_cov():
    v = np.eye(40)
    within = 1.0 / (1.0 + _M5_NOISE_VAR)
    for b in range(3):
        sl = slice(5 * b, 5 * b + 5)
        v[sl, sl] = within
    np.fill_diagonal(v, 1.0)
    return v


def model_spec(model_id: int) -> SimModelSpec:
    """Parameters of benchmark model ``model_id`` (1 to 6)."""
    if model_id not in MODEL_IDS:
        raise BadModelIdError(f"model id must be one of {MODEL_IDS}, got {model_id!r}")
    if model_id in (1, 2, 3):
        beta = {
            1: [3, 2, 1.5, 0, 0, 0, 0, 0],
            2: [3, 0, 0, 1.5, 0, 0, 0, 2],
            3: [0.85] * 8,
        }[model_id]
        return SimModelSpec(model_id, 20, 8, 3.0, CovKind.AR1, np.array(beta, float), _ar1(8, 0.7))
    if model_id == 4:
        beta = np.concatenate([np.zeros(10), np.full(10, 2.0), np.zeros(10), np.full(10, 2.0)])
        v = np.full((40, 40), 0.5)
        np.fill_diagonal(v, 1.0)
        return SimModelSpec(4, 100, 40, 15.0, CovKind.COMPOUND_SYMMETRY, beta, v)
    if model_id == 5:
        beta = np.concatenate([np.full(15, 3.0), np.zeros(25)])
        return SimModelSpec(5, 50, 40, 15.0, CovKind.THREE_BLOCK, beta, _model5_cov())
    blocks = [(3.0, 5), (0.0, 10), (2.0, 5), (0.0, 10), (-1.5, 5), (0.0, 10), (1.0, 5), (0.0, 50)]
    beta = np.concatenate([np.full(k, v) for v, k in blocks])
    return SimModelSpec(6, 50, 100, 3.0, CovKind.AR1, beta, _ar1(100, 0.7))


def sample_design(spec: SimModelSpec, rows: int, rng: np.random.Generator) -> np.ndarray:
    if spec.cov_kind == CovKind.THREE_BLOCK:
        z = rng.standard_normal((rows, 3))
        x = np.empty((rows, spec.p))
        x[:, :15] = np.repeat(z, 5, axis=1) + math.sqrt(_M5_NOISE_VAR) * rng.standard_normal((rows, 15))
        x[:, :15] *= _M5_SCALE
        x[:, 15:] = rng.standard_normal((rows, spec.p - 15))
        return x
    chol = np.linalg.cholesky(spec.v_matrix)
    return rng.standard_normal((rows, spec.p)) @ chol.T


def generate_replicate(spec: SimModelSpec, seed: int):
    """Draw ``2n`` rows; the first ``n`` are the training set and the rest the validation set.

    Returns ``(x_train, y_train, x_valid, y_valid)`` on the raw scale.
    """
    rng = np.random.default_rng(seed)
    x = sample_design(spec, 2 * spec.n, rng)
    y = x @ spec.beta_true + spec.sigma * rng.standard_normal(2 * spec.n)
    n = spec.n
    return x[:n], y[:n], x[n:], y[n:]


def mse(beta_hat, beta_true, v) -> float:
    """``(b_hat - b)^T V (b_hat - b)``."""
    beta_hat = np.asarray(beta_hat, dtype=float).ravel()
    beta_true = np.asarray(beta_true, dtype=float).ravel()
    v = np.asarray(v, dtype=float)
    if beta_hat.shape != beta_true.shape or v.shape != (beta_hat.size, beta_hat.size):
        raise DimensionMismatchError("beta_hat, beta_true and v must agree in dimension")
    diff = beta_hat - beta_true
    return float(diff @ v @ diff)


@dataclass
class MethodOutcome:
    mse: float
    df: int
    selected_alpha: float
    selected_lambda: float
    error: str | None = None
    max_kkt_residual: float = math.nan
    all_monotone: bool = True
    all_converged: bool = True


@dataclass
class ReplicateResult:
    model_id: int
    rep_index: int
    seed: int
    methods: dict = field(default_factory=dict)


@dataclass
class SummaryCell:
    model_id: int
    method: str
    n_ok: int
    n_failed: int
    mse_median: float
    mse_p10: float
    mse_p90: float
    df_median: float
    df_p10: float
    df_p90: float


@dataclass
class StudySummary:
    cells: list
    replicates: list

    def cell(self, model_id, method) -> SummaryCell:
        for c in self.cells:
            if c.model_id == model_id and c.method == method:
                return c
        raise KeyError((model_id, method))


def default_enet_alphas():
    return tuple(np.round(np.linspace(0.1, 1.0, 10), 12))


def method_grid(method: str, p: int, grid: TuningGrid | None) -> TuningGrid:
    """The tuning grid for ``method``; lambda values are filled in per dataset when absent."""
    if method == "horses":
        return grid or TuningGrid.default(p)
    lambdas = grid.lambdas if grid is not None else None
    n_lam = grid.n_lambdas if grid is not None else 30
    if method == "lasso":
        return TuningGrid((1.0,), lambdas, n_lambdas=n_lam)
    if method == "enet":
        return TuningGrid(default_enet_alphas(), lambdas, n_lambdas=n_lam)
    if method == "ridge":
        return TuningGrid((0.0,), lambdas, n_lambdas=n_lam)
    raise ValueError(f"unknown method {method!r}")


def run_replicate(model_id, rep_index, base_seed, methods, grid=None) -> ReplicateResult:
    spec = model_spec(model_id)
    seed = base_seed + rep_index
    xt, yt, xv, yv = generate_replicate(spec, seed)
    out = ReplicateResult(model_id, rep_index, seed)
    for method in methods:
        try:
            res = validation_pe(Dataset(xt, yt), Dataset(xv, yv), method_grid(method, spec.p, grid), fitter=method)
            df = spec.p if method == "ridge" else res.fit.df
            out.methods[method] = MethodOutcome(
                mse(res.raw_beta, spec.beta_true, spec.v_matrix), int(df), res.best_alpha, res.best_lambda,
                max_kkt_residual=res.extra["max_kkt_residual"],
                all_monotone=res.extra["all_monotone"],
                all_converged=res.extra["all_converged"],
            )
        except (HorsesError, ArithmeticError, np.linalg.LinAlgError) as exc:
            out.methods[method] = MethodOutcome(math.nan, -1, math.nan, math.nan, f"{type(exc).__name__}: {exc}")
    return out


def _task(args):
    return run_replicate(*args)


def summarize(replicates, models, methods) -> list:
    cells = []
    for m in models:
        for meth in methods:
            outs = [r.methods[meth] for r in replicates if r.model_id == m and meth in r.methods]
            ok = [o for o in outs if o.error is None]
            if ok:
                ms = np.array([o.mse for o in ok])
                ds = np.array([o.df for o in ok], dtype=float)
                q_m = np.percentile(ms, [50, 10, 90], method="linear")
                q_d = np.percentile(ds, [50, 10, 90], method="linear")
            else:
                q_m = q_d = [math.nan] * 3
            cells.append(SummaryCell(m, meth, len(ok), len(outs) - len(ok), *map(float, q_m), *map(float, q_d)))
    return cells


def run_study(models, methods, reps: int, base_seed: int = 0, grid: TuningGrid | None = None, jobs: int = 1) -> StudySummary:
    """Replicate the comparison for every model and method.

    Replicate ``r`` of every model uses seed ``base_seed + r``.  Failures are
    recorded in the replicate record and excluded from the summary.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    models = [int(m) for m in models]
    for m in models:
        model_spec(m)
    methods = list(methods)
    for meth in methods:
        if meth not in METHODS:
            raise ValueError(f"unknown method {meth!r}; choose from {METHODS}")
    tasks = [(m, r, base_seed, methods, grid) for m in models for r in range(reps)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            replicates = list(pool.map(_task, tasks, chunksize=1))
    else:
        replicates = [_task(t) for t in tasks]
    replicates.sort(key=lambda r: (models.index(r.model_id), r.rep_index))
    return StudySummary(summarize(replicates, models, methods), replicates)
