"""Command-line front end.

Subcommands: ``toy`` (seeded toy reproductions), ``adapt`` (generic
CSV-to-CSV adaptation), ``sweep`` (hyper-parameter grids), ``eval``
(re-score a serialized model). Reports are JSON with stable key order;
plot series are CSV. Exit codes: 0 success, 2 usage, 3 data error,
4 solver error. The ``JDOT_WORKERS`` env var bounds the sweep worker
pool.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import scipy

from . import __version__
from .bcd import JdotConfig, jdot_fit
from .datasets import (
    LabeledDataset,
    gen_1d_regression_shift,
    gen_rotated_gaussians,
    load_csv,
    save_csv,
)
from .errors import DataError, SolverError
from .learners import load_predictor, predict, save_predictor
from .metrics import accuracy, mse, within_range_accuracy
from .rkhs import Kernel

TOY_KINDS = ("rotated-gaussians", "regression-1d")


def _versions() -> dict:
    return {
        "jdot": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _parse_alpha_token(token: str):
    token = token.strip()
    if token == "heuristic":
        return token
    try:
        value = float(token)
    except ValueError:
        raise DataError(
            f"alpha must be 'heuristic' or a positive number, got {token!r}"
        ) from None
    return value


def _parse_alpha_list(raw: str) -> list:
    tokens = [t for t in raw.split(",") if t.strip()]
    if not tokens:
        raise DataError("empty alpha list")
    return [_parse_alpha_token(t) for t in tokens]


def _parse_float_list(raw: str, name: str) -> list:
    out = []
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            out.append(float(token))
        except ValueError:
            raise DataError(f"{name} must be numbers, got {token!r}") from None
    if not out:
        raise DataError(f"empty {name} list")
    return out


def _parse_ot(raw: str) -> tuple:
    """'exact' or 'entropic:EPS' -> (method, epsilon)."""
    if raw == "exact":
        return "exact", None
    if raw.startswith("entropic"):
        _, _, eps = raw.partition(":")
        if not eps:
            return "entropic", 1e-2
        try:
            return "entropic", float(eps)
        except ValueError:
            raise DataError(f"bad epsilon in transport choice {raw!r}") from None
    raise DataError(f"transport choice must be 'exact' or 'entropic:EPS', got {raw!r}")


def _kernel_from_args(args) -> Kernel:
    return Kernel(kind=args.kernel, bandwidth=args.bandwidth)


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2))
        fh.write("\n")


def _metric_pair(model, ds: LabeledDataset, task: str, range_r=None) -> dict:
    """Metrics of one model on one labeled dataset."""
    preds = predict(model, ds.X)
    if task == "classification":
        return {"accuracy": accuracy(ds.y, preds)}
    out = {"mse": mse(ds.y, preds)}
    if range_r is not None:
        out["within_range_accuracy"] = within_range_accuracy(ds.y, preds, range_r)
    return out


def _make_config(args, task: str, alpha) -> JdotConfig:
    ot_method, epsilon = _parse_ot(args.ot)
    kwargs = {
        "task": task,
        "alpha": alpha,
        "lam": args.reg_lambda,
        "max_iter": args.iters,
        "rel_tol": args.rel_tol,
        "ot_method": ot_method,
        "kernel": _kernel_from_args(args),
        "seed": args.seed,
    }
    if epsilon is not None:
        kwargs["epsilon"] = epsilon
    if hasattr(args, "hinge_tol"):
        kwargs["hinge_tol"] = args.hinge_tol
        kwargs["hinge_max_iter"] = args.hinge_max_iter
    return JdotConfig(**kwargs)


def _run_series(source, target, cfg: JdotConfig, iters: int, task: str):
    """One adaptation run plus its padded per-iteration metric series."""
    trace = jdot_fit(source, target, cfg)
    metric_key = "accuracy" if task == "classification" else "mse"
    per_iter = []
    for model in trace.models:
        value = _metric_pair(model, target, task)[metric_key]
        per_iter.append(value)
    fit_steps = [s for s in trace.iterations if s.phase == "fit"]
    series = []
    for i in range(1, iters + 1):
        # after convergence the run stops early; repeat the settled values
        # so every series has exactly `iters` rows
        j = min(i, len(per_iter)) - 1
        series.append(
            {
                "iteration": i,
                metric_key: per_iter[j],
                "objective": fit_steps[j].objective,
            }
        )
    return trace, series, per_iter[-1]


def cmd_toy(args) -> int:
    t0 = time.perf_counter()
    os.makedirs(args.out, exist_ok=True)
    alphas = _parse_alpha_list(args.alpha)
    task = "classification" if args.kind == "rotated-gaussians" else "regression"
    metric_key = "accuracy" if task == "classification" else "mse"

    if args.kind == "rotated-gaussians":
        rotation = math.radians(args.rotation_deg)
        source, target = gen_rotated_gaussians(
            args.n_per_class, rotation, args.seed
        )
    else:
        source, target = gen_1d_regression_shift(
            args.n, args.seed, noise=args.noise, shift=args.shift
        )
    save_csv(source, os.path.join(args.out, "source.csv"))
    save_csv(target, os.path.join(args.out, "target.csv"))

    runs = []
    baseline_model = None
    series_rows = []
    alpha_labels = [t.strip() for t in args.alpha.split(",") if t.strip()]
    for token, alpha in zip(alpha_labels, alphas):
        cfg = _make_config(args, task, alpha)
        trace, series, final_metric = _run_series(
            source, target, cfg, args.iters, task
        )
        if baseline_model is None:
            baseline_model = trace.initial_model
        label = token.strip()
        for row in series:
            series_rows.append(
                [label, row["iteration"], row[metric_key], row["objective"]]
            )
        runs.append(
            {
                "alpha": label,
                "alpha_resolved": trace.resolved["alpha"],
                "lambda_resolved": trace.resolved["lam"],
                "bandwidth": trace.resolved["bandwidth"],
                f"final_{metric_key}": final_metric,
                "objective_final": trace.iterations[-1].objective,
                "converged": trace.converged,
                "converged_at": trace.converged_at,
                "n_iterations": len(trace.models),
                "trace": trace.records(),
            }
        )
        save_predictor(
            trace.final_model,
            os.path.join(args.out, f"model_alpha_{label}.json"),
        )

    with open(
        os.path.join(args.out, "series.csv"), "w", encoding="utf-8", newline=""
    ) as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "iteration", metric_key, "objective"])
        for row in series_rows:
            writer.writerow([row[0], row[1], repr(row[2]), repr(row[3])])

    baseline = _metric_pair(baseline_model, target, task)
    baseline.update(
        {f"source_{k}": v for k, v in _metric_pair(baseline_model, source, task).items()}
    )
    save_predictor(baseline_model, os.path.join(args.out, "baseline_model.json"))
    report = {
        "command": "toy",
        "kind": args.kind,
        "config": {
            "alphas": [t.strip() for t in args.alpha.split(",") if t.strip()],
            "iters": args.iters,
            "seed": args.seed,
            "lambda": args.reg_lambda,
            "kernel": args.kernel,
            "bandwidth": args.bandwidth,
            "ot": args.ot,
            "rel_tol": args.rel_tol,
        },
        "dataset": {
            "n_source": source.n,
            "n_target": target.n,
            "dim": source.dim,
        },
        "versions": _versions(),
        "baseline": baseline,
        "runs": runs,
        f"baseline_{metric_key}": baseline[metric_key],
        f"jdot_{metric_key}": runs[0][f"final_{metric_key}"],
        "timing": {"wall_time_s": time.perf_counter() - t0},
    }
    if args.kind == "rotated-gaussians":
        report["config"]["n_per_class"] = args.n_per_class
        report["config"]["rotation_deg"] = args.rotation_deg
    else:
        report["config"]["n"] = args.n
        report["config"]["noise"] = args.noise
        report["config"]["shift"] = args.shift
    report_path = os.path.join(args.out, "report.json")
    _write_json(report_path, report)
    print(report_path)
    return 0


def _load_pair(args, task: str):
    features = None
    if args.features is not None:
        features = [t.strip() for t in args.features.split(",") if t.strip()]
    source = load_csv(
        args.source,
        feature_cols=features,
        label_col=args.label,
        task=task,
        domain_tag="source",
    )
    try:
        with open(args.target, encoding="utf-8", newline="") as fh:
            header = [h.strip() for h in next(csv.reader(fh), [])]
    except OSError as exc:
        raise DataError(f"cannot open {args.target}: {exc}") from exc
    target_label = args.label if args.label in header else None
    target = load_csv(
        args.target,
        feature_cols=features,
        label_col=target_label,
        task=task,
        domain_tag="target",
    )
    if source.dim != target.dim:
        raise DataError(
            f"feature dimensions differ: source {source.dim}, target {target.dim}"
        )
    return source, target


def cmd_adapt(args) -> int:
    t0 = time.perf_counter()
    os.makedirs(args.out, exist_ok=True)
    task = args.task
    source, target = _load_pair(args, task)
    alpha = _parse_alpha_token(args.alpha)
    cfg = _make_config(args, task, alpha)
    trace = jdot_fit(source, target, cfg)

    metrics = {}
    if target.y is not None:
        metrics["jdot"] = _metric_pair(trace.final_model, target, task, args.range)
        metrics["baseline"] = _metric_pair(
            trace.initial_model, target, task, args.range
        )
    save_predictor(trace.final_model, os.path.join(args.out, "model.json"))
    save_predictor(
        trace.initial_model, os.path.join(args.out, "baseline_model.json")
    )
    trace.write_jsonl(os.path.join(args.out, "trace.jsonl"))
    report = {
        "command": "adapt",
        "config": {
            "source": args.source,
            "target": args.target,
            "task": task,
            "alpha": args.alpha,
            "lambda": args.reg_lambda,
            "kernel": args.kernel,
            "bandwidth": args.bandwidth,
            "ot": args.ot,
            "iters": args.iters,
            "rel_tol": args.rel_tol,
            "seed": args.seed,
        },
        "resolved": trace.resolved,
        "versions": _versions(),
        "converged": trace.converged,
        "converged_at": trace.converged_at,
        "n_iterations": len(trace.models),
        "objective_final": trace.iterations[-1].objective,
        "metrics": metrics,
        "target_labeled": target.y is not None,
        "timing": {"wall_time_s": time.perf_counter() - t0},
    }
    report_path = os.path.join(args.out, "report.json")
    _write_json(report_path, report)
    print(report_path)
    return 0


def _sweep_cell(payload: dict) -> dict:
    """One grid cell; runs in its own worker with its own data load."""
    row = {
        "alpha": payload["alpha_label"],
        "lambda": payload["lam"] if payload["lam"] is not None else "default",
        "epsilon": payload["epsilon"] if payload["epsilon"] is not None else "",
        "ot": payload["ot_method"],
        "seed": payload["seed"],
        "status": "ok",
        "metric_name": "",
        "metric": "",
        "iterations": "",
        "converged": "",
        "error": "",
    }
    try:
        if payload["toy"] is not None:
            if payload["toy"] == "rotated-gaussians":
                source, target = gen_rotated_gaussians(
                    payload["n_per_class"],
                    math.radians(payload["rotation_deg"]),
                    payload["seed"],
                )
                task = "classification"
            else:
                source, target = gen_1d_regression_shift(
                    payload["n"], payload["seed"]
                )
                task = "regression"
        else:
            task = payload["task"]
            source = load_csv(
                payload["source"],
                label_col=payload["label"],
                task=task,
                domain_tag="source",
            )
            target = load_csv(
                payload["target"],
                label_col=payload["label"],
                task=task,
                domain_tag="target",
            )
        cfg = JdotConfig(
            task=task,
            alpha=payload["alpha"],
            lam=payload["lam"],
            max_iter=payload["iters"],
            rel_tol=payload["rel_tol"],
            ot_method=payload["ot_method"],
            epsilon=payload["epsilon"] if payload["epsilon"] is not None else 1e-2,
            kernel=Kernel(kind=payload["kernel"], bandwidth=payload["bandwidth"]),
            seed=payload["seed"],
        )
        trace = jdot_fit(source, target, cfg)
        metric_name = "accuracy" if task == "classification" else "mse"
        if target.y is not None:
            value = _metric_pair(trace.final_model, target, task)[metric_name]
            row["metric_name"] = metric_name
            row["metric"] = repr(value)
        row["iterations"] = len(trace.models)
        row["converged"] = trace.converged
    except Exception as exc:  # cell failures stay in-row, the sweep continues
        row["status"] = "error"
        row["error"] = str(exc)
    return row


SWEEP_COLUMNS = (
    "alpha",
    "lambda",
    "epsilon",
    "ot",
    "seed",
    "status",
    "metric_name",
    "metric",
    "iterations",
    "converged",
    "error",
)


def cmd_sweep(args) -> int:
    if args.toy is None and (args.source is None or args.target is None):
        raise DataError("sweep needs either --toy KIND or --source and --target")
    alphas = _parse_alpha_list(args.alpha)
    alpha_labels = [t.strip() for t in args.alpha.split(",") if t.strip()]
    lams = (
        [None]
        if args.reg_lambda_grid is None
        else _parse_float_list(args.reg_lambda_grid, "lambda grid")
    )
    ot_method, eps_default = _parse_ot(args.ot)
    if ot_method == "entropic":
        epsilons = (
            [eps_default]
            if args.epsilon_grid is None
            else _parse_float_list(args.epsilon_grid, "epsilon grid")
        )
    else:
        if args.epsilon_grid is not None:
            raise DataError("--epsilon-grid requires --ot entropic")
        epsilons = [None]

    payloads = []
    for alpha_label, alpha in zip(alpha_labels, alphas):
        for lam in lams:
            for eps in epsilons:
                payloads.append(
                    {
                        "alpha": alpha,
                        "alpha_label": alpha_label,
                        "lam": lam,
                        "epsilon": eps,
                        "ot_method": ot_method,
                        "seed": args.seed,
                        "iters": args.iters,
                        "rel_tol": args.rel_tol,
                        "kernel": args.kernel,
                        "bandwidth": args.bandwidth,
                        "toy": args.toy,
                        "n_per_class": args.n_per_class,
                        "rotation_deg": args.rotation_deg,
                        "n": args.n,
                        "task": args.task,
                        "source": args.source,
                        "target": args.target,
                        "label": args.label,
                    }
                )

    workers = int(os.environ.get("JDOT_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, payloads))
    else:
        rows = [_sweep_cell(p) for p in payloads]

    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    print(args.out)
    return 0


def cmd_eval(args) -> int:
    model = load_predictor(args.model)
    task = "classification" if model.task == "classification-ova" else "regression"
    ds = load_csv(args.data, label_col=args.label, task=task)
    metrics = _metric_pair(model, ds, task, args.range)
    payload = {"model": args.model, "data": args.data, "metrics": metrics}
    out = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
            fh.write("\n")
    print(out)
    return 0


def _add_common_run_flags(p, default_alpha: str) -> None:
    p.add_argument("--alpha", default=default_alpha,
                   help="comma list of balance weights; numbers or 'heuristic'")
    p.add_argument("--lambda", dest="reg_lambda", type=float, default=None,
                   help="ridge weight on the joint-objective scale "
                        "(default 0.01 / N_t)")
    p.add_argument("--kernel", choices=("rbf", "linear"), default="rbf")
    p.add_argument("--bandwidth", type=float, default=None,
                   help="rbf bandwidth g in exp(-g ||x-x'||^2); "
                        "default: median heuristic")
    p.add_argument("--ot", default="exact",
                   help="'exact' or 'entropic:EPS' (default exact)")
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--rel-tol", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jdot",
        description="Joint feature/label optimal transport for unsupervised "
                    "domain adaptation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_toy = sub.add_parser("toy", help="run a seeded toy reproduction")
    p_toy.add_argument("kind", choices=TOY_KINDS)
    _add_common_run_flags(p_toy, default_alpha="heuristic")
    p_toy.add_argument("--n-per-class", type=int, default=40)
    p_toy.add_argument("--rotation-deg", type=float, default=45.0)
    p_toy.add_argument("--n", type=int, default=120, help="regression sample count")
    p_toy.add_argument("--noise", type=float, default=0.05)
    p_toy.add_argument("--shift", type=float, default=math.pi)
    p_toy.add_argument("--hinge-tol", type=float, default=1e-6)
    p_toy.add_argument("--hinge-max-iter", type=int, default=5000)
    p_toy.add_argument("--out", default="jdot-toy-out")
    p_toy.set_defaults(func=cmd_toy)

    p_adapt = sub.add_parser("adapt", help="adapt a source CSV to a target CSV")
    p_adapt.add_argument("source")
    p_adapt.add_argument("target")
    p_adapt.add_argument("--task", choices=("regression", "classification"),
                         required=True)
    p_adapt.add_argument("--label", default="y", help="label column name")
    p_adapt.add_argument("--features", default=None,
                         help="comma list of feature columns (default: all "
                              "non-label columns)")
    _add_common_run_flags(p_adapt, default_alpha="heuristic")
    p_adapt.add_argument("--hinge-tol", type=float, default=1e-6)
    p_adapt.add_argument("--hinge-max-iter", type=int, default=5000)
    p_adapt.add_argument("--range", type=float, default=None,
                         help="within-range accuracy threshold (regression)")
    p_adapt.add_argument("--out", default="jdot-adapt-out")
    p_adapt.set_defaults(func=cmd_adapt)

    p_sweep = sub.add_parser("sweep", help="grid over alpha/lambda/epsilon")
    p_sweep.add_argument("--toy", choices=TOY_KINDS, default=None)
    p_sweep.add_argument("--source", default=None)
    p_sweep.add_argument("--target", default=None)
    p_sweep.add_argument("--task", choices=("regression", "classification"),
                         default="regression")
    p_sweep.add_argument("--label", default="y")
    _add_common_run_flags(p_sweep, default_alpha="heuristic")
    p_sweep.add_argument("--lambda-grid", dest="reg_lambda_grid", default=None,
                         help="comma list of ridge weights")
    p_sweep.add_argument("--epsilon-grid", dest="epsilon_grid", default=None,
                         help="comma list of entropic strengths "
                              "(with --ot entropic)")
    p_sweep.add_argument("--n-per-class", type=int, default=40)
    p_sweep.add_argument("--rotation-deg", type=float, default=45.0)
    p_sweep.add_argument("--n", type=int, default=120)
    p_sweep.add_argument("--out", default="sweep.csv")
    p_sweep.set_defaults(func=cmd_sweep)

    p_eval = sub.add_parser("eval", help="re-score a serialized model on a CSV")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--label", default="y")
    p_eval.add_argument("--range", type=float, default=None)
    p_eval.add_argument("--out", default=None)
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
