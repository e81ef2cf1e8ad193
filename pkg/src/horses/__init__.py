"""Sparse least squares with exact grouping of correlated predictors.

The estimator minimizes

    0.5*||y - X b||^2 + lam*alpha*sum_j |b_j| + lam*(1 - alpha)*sum_{j<k} |b_j - b_k|

on standardized data.  The L1 term zeroes out predictors and the all-pairs
fusion term sets coefficients of positively correlated predictors exactly
equal.
"""

from .baselines import BaselineSpec, fit_elastic_net, fit_lasso, fit_ridge
from .data import (
    Dataset,
    FitResult,
    GroupStructure,
    PenaltySpec,
    StandardizationReport,
    destandardize,
    group_extract,
    standardize,
)
from .estimators import ElasticNetRegressor, HorsesRegressor, LassoRegressor, RidgeRegressor
from .oracles import OracleConfig, StepRule, flsa_1d, grid_solve_2d, oracle_solve
from .simulation import generate_replicate, model_spec, mse, run_study
from .solver import (
    FusionPairStrategy,
    SolverConfig,
    constraint_to_lagrangian,
    descent_step,
    fusion_step,
    grouping_bound,
    kkt_residual,
    lambda_max,
    objective,
    solve,
    solve_path,
)
from .tuning import (
    TuningGrid,
    TuningResult,
    bic,
    degrees_of_freedom,
    gcv,
    information_criterion,
    kfold_cv,
    validation_pe,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineSpec",
    "Dataset",
    "ElasticNetRegressor",
    "FitResult",
    "FusionPairStrategy",
    "GroupStructure",
    "HorsesRegressor",
    "LassoRegressor",
    "OracleConfig",
    "PenaltySpec",
    "RidgeRegressor",
    "SolverConfig",
    "StandardizationReport",
    "StepRule",
    "TuningGrid",
    "TuningResult",
    "bic",
    "constraint_to_lagrangian",
    "degrees_of_freedom",
    "descent_step",
    "destandardize",
    "fit_elastic_net",
    "fit_lasso",
    "fit_ridge",
    "flsa_1d",
    "fusion_step",
    "gcv",
    "generate_replicate",
    "grid_solve_2d",
    "group_extract",
    "grouping_bound",
    "information_criterion",
    "kfold_cv",
    "kkt_residual",
    "lambda_max",
    "model_spec",
    "mse",
    "objective",
    "oracle_solve",
    "run_study",
    "solve",
    "solve_path",
    "standardize",
    "validation_pe",
]
