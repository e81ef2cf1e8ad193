"""Command-line interface: ``horses fit|tune|path|simulate``.

Exit codes: 0 success, 2 bad input (unparsable flags or files, invalid
settings), 3 dimension mismatch, 4 solver non-convergence (the result is
still written and flagged), 5 unknown simulation model id.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .data import Dataset, PenaltySpec, destandardize, group_extract, standardize
from .exceptions import (
    BadModelIdError,
    DimensionMismatchError,
    HorsesError,
    MaxSweepsExceeded,
)
from .simulation import MODEL_IDS, run_study
from .solver import SolverConfig, constraint_to_lagrangian, solve, solve_path
from .tuning import TuningGrid, information_criterion, kfold_cv

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_NONCONVERGED = 4
EXIT_BAD_MODEL = 5

DEFAULT_SEED = 20240101


class InputError(Exception):
    """A file or flag value that cannot be parsed."""


# ----------------------------------------------------------------------------
# input


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_matrix(path: str):
    """Read a numeric CSV; returns ``(array, column_names)``.

    A first row with any non-numeric field is taken as the header.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(f.strip() for f in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path} is empty")
    header = None
    if not all(_is_number(f) for f in rows[0]):
        header, rows = [f.strip() for f in rows[0]], rows[1:]
    if not rows:
        raise InputError(f"{path} has no data rows")
    width = len(rows[0])
    if header is not None and len(header) != width:
        raise InputError(f"{path}: header has {len(header)} fields, data has {width}")
    try:
        data = np.array([[float(f) for f in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric value ({exc})") from exc
    except Exception as exc:  # ragged rows
        raise InputError(f"{path}: rows have different lengths") from exc
    if data.ndim != 2 or any(len(r) != width for r in rows):
        raise InputError(f"{path}: rows have different lengths")
    if not np.all(np.isfinite(data)):
        raise InputError(f"{path}: values must be finite")
    names = header or [f"x{j}" for j in range(width)]
    return data, names


def read_xy(args):
    x, names = read_matrix(args.x)
    y, _ = read_matrix(args.y)
    if y.shape[1] != 1:
        raise InputError(f"{args.y} must have exactly one column, found {y.shape[1]}")
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"X has {x.shape[0]} rows but y has {y.shape[0]}")
    return x, y[:, 0], names


def _float_list(text: str | None):
    if text is None:
        return None
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse number list {text!r}") from exc
    if not vals:
        raise InputError(f"empty number list {text!r}")
    return vals


# ----------------------------------------------------------------------------
# output


def _num(v):
    """JSON-safe float: shortest round-trip repr, NaN/inf as strings."""
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _json_text(doc):
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def fit_document(fit, report, names, penalty: PenaltySpec, p: int):
    raw_beta, intercept = destandardize(fit.beta, report)
    groups = []
    for value, members in fit.groups.groups:
        groups.append({
            "value_standardized": _num(value),
            "members": list(members),
            "columns": [names[i] for i in members],
        })
    return {
        "method": fit.method,
        "penalty": {
            "alpha": _num(penalty.alpha),
            "lambda": _num(penalty.lam),
            "lambda1": _num(penalty.lambda1),
            "lambda2": _num(penalty.lambda2),
            "d": _num(penalty.resolved_d(p)),
        },
        "columns": list(names),
        "coefficients_raw": [_num(b) for b in raw_beta],
        "coefficients_standardized": [_num(b) for b in fit.beta],
        "intercept": _num(intercept),
        "groups": groups,
        "zero_set": list(fit.groups.zero_set),
        "df": int(fit.df),
        "objective": _num(fit.objective),
        "kkt_residual": _num(fit.kkt_residual),
        "converged": bool(fit.converged),
        "iterations": int(fit.iterations),
        "fusion_moves_accepted": int(fit.fusion_moves_accepted),
    }


def _fit_csv(doc):
    labels = group_extract(np.array(doc["coefficients_standardized"], dtype=float)).labels(len(doc["columns"]))
    rows = [
        (j, name, doc["coefficients_raw"][j], doc["coefficients_standardized"][j], labels[j])
        for j, name in enumerate(doc["columns"])
    ]
    rows.append(("", "(intercept)", doc["intercept"], "", ""))
    return _csv_text(["index", "column", "raw", "standardized", "group_id"], rows)


# ----------------------------------------------------------------------------
# commands


def _config(args):
    return SolverConfig(max_sweeps=args.max_sweeps)


def cmd_fit(args) -> int:
    x, y, names = read_xy(args)
    std, report = standardize(x, y)
    if args.t is not None:
        penalty = constraint_to_lagrangian(std, args.alpha, args.t, args.d, _config(args))
    else:
        penalty = PenaltySpec(args.alpha, args.lam, args.d)
    penalty.check(std.p)
    code = EXIT_OK
    try:
        fit = solve(std, penalty, _config(args))
    except MaxSweepsExceeded as exc:
        fit, code = exc.result, EXIT_NONCONVERGED
    if not fit.converged:
        code = EXIT_NONCONVERGED
    doc = fit_document(fit, report, names, penalty, std.p)
    if args.t is not None:
        doc["penalty"]["t"] = _num(args.t)
    _emit(_json_text(doc) if args.format == "json" else _fit_csv(doc), args.out)
    return code


def _grid_from_args(args, p):
    alphas = _float_list(args.grid_alphas)
    lambdas = _float_list(args.grid_lambdas)
    if alphas is None:
        base = TuningGrid.default(p, d=args.d)
        alphas = base.alphas
    return TuningGrid(tuple(alphas), None if lambdas is None else tuple(lambdas), d=args.d)


def cmd_tune(args) -> int:
    x, y, names = read_xy(args)
    dataset = Dataset(x, y)
    grid = _grid_from_args(args, dataset.p)
    if args.method == "cv":
        res = kfold_cv(dataset, grid, args.folds, args.seed)
    else:
        res = information_criterion(dataset, grid, args.method)
    penalty = PenaltySpec(res.best_alpha, res.best_lambda, args.d)
    doc = {"tuning": res.to_dict(), "fit": fit_document(res.fit, res.report, names, penalty, dataset.p)}
    doc["tuning"]["score_surface"] = [[_num(v) for v in row] for row in res.score_surface]
    if args.format == "json":
        text = _json_text(doc)
    else:
        rows = [
            (res.alphas[i], res.lambdas[i, j], res.score_surface[i, j],
             int((i, j) == tuple(res.best_index)))
            for i in range(len(res.alphas)) for j in range(res.lambdas.shape[1])
        ]
        text = _csv_text(["alpha", "lambda", "score", "selected"], rows)
    _emit(text, args.out)
    return EXIT_OK if res.fit.converged else EXIT_NONCONVERGED


def cmd_path(args) -> int:
    x, y, names = read_xy(args)
    std, _ = standardize(x, y)
    PenaltySpec(args.alpha, 0.0, args.d).check(std.p)
    lambdas = _float_list(args.grid_lambdas)
    if lambdas is None:
        lambdas = TuningGrid((args.alpha,), d=args.d).lambda_table(std)[0]
    lambdas = sorted(lambdas, reverse=True)
    fits = solve_path(std, args.alpha, lambdas, _config(args), args.d)
    rows = []
    for lam, fit in zip(lambdas, fits):
        labels = fit.groups.labels(std.p)
        rows.extend((lam, j, fit.beta[j], labels[j]) for j in range(std.p))
    header = ["lambda", "coefficient_index", "value", "group_id"]
    if args.format == "json":
        text = _json_text({
            "alpha": _num(args.alpha),
            "columns": list(names),
            "rows": [dict(zip(header, (_num(r[0]), r[1], _num(r[2]), int(r[3])))) for r in rows],
            "converged": [bool(f.converged) for f in fits],
        })
    else:
        text = _csv_text(header, rows)
    _emit(text, args.out)
    return EXIT_OK if all(f.converged for f in fits) else EXIT_NONCONVERGED


def _parse_models(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            m = int(tok)
        except ValueError as exc:
            raise BadModelIdError(f"model id {tok!r} is not an integer") from exc
        if m not in MODEL_IDS:
            raise BadModelIdError(f"model id must be one of {MODEL_IDS}, got {m}")
        out.append(m)
    return out


SUMMARY_HEADER = ["model", "method", "mse_median", "mse_p10", "mse_p90", "df_median", "df_p10", "df_p90"]
RAW_HEADER = ["model", "rep_index", "seed", "method", "mse", "df", "selected_alpha", "selected_lambda", "error"]


def cmd_simulate(args) -> int:
    models = _parse_models(args.models)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    grid = None
    if args.grid_alphas is not None or args.grid_lambdas is not None:
        alphas = _float_list(args.grid_alphas)
        grid = TuningGrid(tuple(alphas) if alphas else (1.0,), _float_list(args.grid_lambdas))
    study = run_study(models, methods, args.reps, args.seed, grid, jobs=args.jobs)
    cells = [
        (c.model_id, c.method, c.mse_median, c.mse_p10, c.mse_p90, c.df_median, c.df_p10, c.df_p90)
        for c in study.cells
    ]
    raw = [
        (r.model_id, r.rep_index, r.seed, meth, o.mse, o.df, o.selected_alpha, o.selected_lambda, o.error)
        for r in study.replicates
        for meth, o in r.methods.items()
    ]
    if args.format == "json":
        summary = _json_text({"summary": [dict(zip(SUMMARY_HEADER, [c[0], c[1], *map(_num, c[2:])])) for c in cells]})
        raw_text = _json_text({"replicates": [dict(zip(RAW_HEADER, [*r[:4], _num(r[4]), r[5], _num(r[6]), _num(r[7]), r[8]])) for r in raw]})
    else:
        summary = _csv_text(SUMMARY_HEADER, cells)
        raw_text = _csv_text(RAW_HEADER, raw)
    _emit(summary, args.out)
    raw_path = args.raw
    if raw_path is None and args.out not in (None, "-"):
        raw_path = args.out + ".replicates." + args.format
    if raw_path is not None:
        _emit(raw_text, raw_path)
    return EXIT_OK


# ----------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="horses", description="Sparse regression with coefficient grouping.")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flags(p):
        p.add_argument("--x", required=True, help="design matrix CSV (n rows, p columns, optional header)")
        p.add_argument("--y", required=True, help="response CSV (n rows, 1 column, optional header)")
        p.add_argument("--d", type=float, default=None, help="alpha lower bound is 1/d (default sqrt(p))")

    def out_flags(p, default_format="json"):
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default=default_format)

    def solver_flags(p):
        p.add_argument("--max-sweeps", type=int, default=10000)

    p_fit = sub.add_parser("fit", help="fit at one (alpha, lambda) or (alpha, t)")
    data_flags(p_fit)
    p_fit.add_argument("--alpha", type=float, required=True)
    level = p_fit.add_mutually_exclusive_group(required=True)
    level.add_argument("--lambda", dest="lam", type=float, help="Lagrangian penalty level")
    level.add_argument("--t", type=float, help="constraint-form budget")
    out_flags(p_fit)
    solver_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_tune = sub.add_parser("tune", help="select (alpha, lambda) by cv, gcv or bic")
    data_flags(p_tune)
    p_tune.add_argument("--method", choices=("cv", "gcv", "bic"), default="cv")
    p_tune.add_argument("--folds", type=int, default=5)
    p_tune.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_tune.add_argument("--grid-alphas", default=None, help="comma-separated alpha values")
    p_tune.add_argument("--grid-lambdas", default=None, help="comma-separated lambda values")
    out_flags(p_tune)
    p_tune.set_defaults(func=cmd_tune)

    p_path = sub.add_parser("path", help="coefficient path over lambda at fixed alpha")
    data_flags(p_path)
    p_path.add_argument("--alpha", type=float, required=True)
    p_path.add_argument("--grid-lambdas", default=None, help="comma-separated lambda values")
    out_flags(p_path, "csv")
    solver_flags(p_path)
    p_path.set_defaults(func=cmd_path)

    p_sim = sub.add_parser("simulate", help="replicate the benchmark simulation study")
    p_sim.add_argument("--models", required=True, help="comma-separated model ids 1-6")
    p_sim.add_argument("--methods", default="horses,lasso,enet,ridge")
    p_sim.add_argument("--reps", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_sim.add_argument("--grid-alphas", default=None)
    p_sim.add_argument("--grid-lambdas", default=None)
    p_sim.add_argument("--jobs", type=int, default=1, help="worker processes")
    p_sim.add_argument("--raw", default=None, help="replicate-level output path")
    out_flags(p_sim, "csv")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BadModelIdError as exc:
        print(f"horses: {exc}", file=sys.stderr)
        return EXIT_BAD_MODEL
    except DimensionMismatchError as exc:
        print(f"horses: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except MaxSweepsExceeded as exc:
        print(f"horses: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (InputError, HorsesError, ValueError) as exc:
        print(f"horses: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
