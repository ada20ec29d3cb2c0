"""Command-line harness.

Subcommands write JSON results and CSV curves/traces into an output
directory: ``--out`` if given, else ``$DIVERSE_ENSEMBLES_OUT``, else
``./results``. Exit status is 0 on success, 1 when a verification finds
a violation, 2 on configuration errors.
"""
import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, fields
from datetime import datetime, timezone
from pathlib import Path

from .corr_metrics import is_valid_correlation_matrix, matrix_from_json
from .datasets import load_csv, synthetic_multiclass
from .decorate import DecorateConfig, evaluate_decorate_cv
from .diverse_train import TrainingConfig, evaluate_cv
from .errors import ConfigError, DiversityError
from .theory_bounds import boundary_curve, write_boundary_csv
from .tree_ensemble import rf_study, write_report_csv
from .verification import run_all
from .vote_theory import default_rll_levels, vote_curves, write_vote_curves_csv

OUT_ENV = "DIVERSE_ENSEMBLES_OUT"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

logger = logging.getLogger("diverse_ensembles")


def _out_dir(args):
    path = Path(args.out or os.environ.get(OUT_ENV) or "results")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _stamp(doc):
    doc["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return doc


def _write_json(doc, path):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def _load_config(args):
    if not args.config:
        return {}
    path = Path(args.config)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config", "top level must be an object")
    doc["_base"] = str(path.parent)
    return doc


def _resolve_data(doc, args):
    data = args.data or doc.get("data")
    if not data:
        raise ConfigError("data", "no dataset path given (use --data or a config 'data' field)")
    path = Path(data)
    if not path.is_file() and "_base" in doc:
        path = Path(doc["_base"]) / data
    if not path.is_file():
        raise ConfigError("data", f"file not found: {data}")
    return path


def _build(cls, section, overrides):
    known = {f.name for f in fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], f"unknown field for {cls.__name__}")
    values = {**section, **{k: v for k, v in overrides.items() if v is not None}}
    try:
        return cls(**values).validate()
    except TypeError as exc:
        raise ConfigError(cls.__name__, str(exc)) from exc


def _parse_grid(text):
    try:
        grid = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError("lambda_grid", f"not a comma list of numbers: {text!r}") from exc
    if not grid:
        raise ConfigError("lambda_grid", "empty grid")
    return grid


def _write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "r_tl_sum", "r_ll_sum", "r_tl_ave", "r_ll_ave", "loss"])
        for row in trace:
            w.writerow([row["epoch"], row["r_tl_sum"], row["r_ll_sum"], row["r_tl_ave"], row["r_ll_ave"], row["loss"]])


# -- subcommands ---------------------------------------------------------------


def cmd_verify_theorems(args):
    report = run_all(args.samples, args.seed, pairs=args.pairs)
    if args.matrix:
        m = matrix_from_json(Path(args.matrix).read_text())
        valid = bool(is_valid_correlation_matrix(m))
        report["injected_matrix"] = {"path": args.matrix, "valid": valid}
        report["violations"] += int(not valid)
    out = _out_dir(args)
    _write_json(_stamp(report), out / "verify_theorems.json")
    for s in report["suites"]:
        print(f"{s['suite']}: {s['samples']} samples, {s['violations']} violation(s)")
    if args.matrix:
        print(f"injected matrix valid: {report['injected_matrix']['valid']}")
    return EXIT_OK if report["violations"] == 0 else EXIT_FAIL


def cmd_boundary(args):
    rows = boundary_curve(args.n, args.grid)
    path = _out_dir(args) / f"boundary_n{args.n}.csv"
    write_boundary_csv(rows, path)
    print(path)
    return EXIT_OK


def cmd_vote_curves(args):
    levels = _parse_levels(args.levels) if args.levels else default_rll_levels(args.n)
    rows = vote_curves(args.n, levels, args.grid)
    path = _out_dir(args) / f"vote_curves_n{args.n}.csv"
    write_vote_curves_csv(rows, path)
    print(path)
    return EXIT_OK


def _parse_levels(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError("levels", f"not a comma list of numbers: {text!r}") from exc


def cmd_train(args):
    doc = _load_config(args)
    dataset = load_csv(_resolve_data(doc, args))
    section = doc.get("training", {})
    overrides = {"seed": args.seed, "combiner": args.combiner}
    if args.no_scaling:
        overrides["standardize"] = False
    base = _build(TrainingConfig, section, overrides)
    grid = _parse_grid(args.lambda_grid) if args.lambda_grid else doc.get("lambda_grid") or [base.lam]
    folds = int(doc.get("folds", args.folds))
    out = _out_dir(args)
    for lam in grid:
        cfg = _build(TrainingConfig, {**asdict(base), "lam": float(lam)}, {})
        result = evaluate_cv(cfg, dataset, k=folds, seed=cfg.seed, jobs=args.jobs)
        stem = f"train_{dataset.name}_lam{lam:g}"
        _write_json(_stamp(result.to_dict()), out / f"{stem}.json")
        _write_trace_csv(result.trace, out / f"{stem}_trace.csv")
        print(f"{dataset.name} lambda={lam:g}: mean {folds}-fold error {result.mean_error:.4f}")
    return EXIT_OK


def cmd_decorate(args):
    doc = _load_config(args)
    dataset = load_csv(_resolve_data(doc, args))
    overrides = {"seed": args.seed}
    if args.no_scaling:
        overrides["standardize"] = False
    cfg = _build(DecorateConfig, doc.get("decorate", {}), overrides)
    folds = int(doc.get("folds", args.folds))
    result = evaluate_decorate_cv(cfg, dataset, k=folds, seed=cfg.seed, jobs=args.jobs)
    out = _out_dir(args)
    stem = f"decorate_{dataset.name}"
    _write_json(_stamp(result.to_dict()), out / f"{stem}.json")
    _write_trace_csv(result.trace, out / f"{stem}_trace.csv")
    print(f"{dataset.name} DECORATE: mean {folds}-fold error {result.mean_error:.4f}")
    return EXIT_OK


def cmd_rf_study(args):
    doc = _load_config(args)
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    if args.data or doc.get("data"):
        dataset = load_csv(_resolve_data(doc, args))
    else:
        syn = {"n": 1500, "n_features": 30, "n_informative": 8, "n_classes": 5, **doc.get("synthetic", {})}
        dataset = synthetic_multiclass(syn["n"], syn["n_features"], syn["n_informative"], syn["n_classes"], seed)
    if dataset.q < 20:
        raise ConfigError("data", f"the study needs at least 20 features for m=20, got {dataset.q}")
    reports = rf_study(dataset.X, dataset.labels, dataset.n_classes, seed=seed)
    out = _out_dir(args)
    write_report_csv(reports, out / "rf_study.csv")
    doc_out = {"dataset": dataset.name, "seed": seed, "forests": [asdict(r) for r in reports]}
    _write_json(_stamp(doc_out), out / "rf_study.json")
    for r in reports:
        print(f"{r.label:12s} r_ll={r.r_ll_ave:.4f} r_tl={r.r_tl_ave:.4f} vote_acc={r.majority_accuracy:.4f}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="diverse-ensembles", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, jobs=False):
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        if jobs:
            p.add_argument("--config", help="JSON experiment config")
            p.add_argument("--data", help="CSV dataset (overrides the config)")
            p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
            p.add_argument("--folds", type=int, default=10)
            p.add_argument("--no-scaling", action="store_true", help="skip feature standardisation")

    p = sub.add_parser("verify-theorems", help="random checks of the correlation bounds")
    common(p)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--pairs", type=int, default=2000)
    p.add_argument("--matrix", help="JSON correlation matrix to validate as well")
    p.set_defaults(func=cmd_verify_theorems, seed=0)

    p = sub.add_parser("boundary", help="feasible-region boundary curve as CSV")
    common(p)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--grid", type=int, default=201)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("vote-curves", help="majority-vote accuracy curves as CSV")
    common(p)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--levels", help="comma list of r_ll levels")
    p.add_argument("--grid", type=int, default=101)
    p.set_defaults(func=cmd_vote_curves)

    p = sub.add_parser("train", help="cross-validate the correlation-loss ensemble")
    common(p, jobs=True)
    p.add_argument("--lambda-grid", help="comma list of lambda values")
    p.add_argument("--combiner", choices=["avg", "vote"])
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("decorate", help="cross-validate the DECORATE baseline")
    common(p, jobs=True)
    p.set_defaults(func=cmd_decorate)

    p = sub.add_parser("rf-study", help="diversity report of the 11 study forests")
    common(p, jobs=True)
    p.set_defaults(func=cmd_rf_study)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and args.seed < 0:
        print("config error [seed]: must be >= 0", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DiversityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
