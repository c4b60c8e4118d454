"""Command-line front end: cross-validated evaluation of one classifier.

Example::

    linbin -t iris.arff -i 2 -x 2 -W LR -O Tron -D --out report.json

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import DataError, parse_arff
from .evaluate import (ExperimentSpec, bias_variance, cross_validate,
                       size_category)
from .solvers import NumericError, SolverConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

SOLVER_NAMES = {"GD": "gd", "QN": "qn", "CG": "cg", "Tron": "tron", "SGD": "sgd"}
CLASSIFIER_NAMES = ("LR", "SVC", "ANN0", "SVC-OVA")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="linbin",
        description="Cross-validated evaluation of linear classifiers with "
                    "optional discretization of quantitative attributes.")
    p.add_argument("-t", dest="dataset", required=True, metavar="PATH",
                   help="ARFF dataset (last attribute is the nominal class)")
    p.add_argument("-W", dest="classifier", required=True,
                   choices=CLASSIFIER_NAMES, help="classifier to evaluate")
    p.add_argument("-O", dest="solver", default="Tron",
                   choices=sorted(SOLVER_NAMES), help="training solver")
    p.add_argument("-i", dest="rounds", type=int, default=2,
                   help="cross-validation rounds (default 2)")
    p.add_argument("-x", dest="folds", type=int, default=2,
                   help="folds per round (default 2)")
    p.add_argument("-D", dest="discretize", action="store_true",
                   help="discretize quantitative attributes on each training fold")
    p.add_argument("-V", dest="verbose", action="store_true",
                   help="print per-iteration objective values to stderr")
    p.add_argument("--disc-method", choices=("ewd", "efd", "mdlp"),
                   default="mdlp", help="discretization method (default mdlp)")
    p.add_argument("--bins", type=int, default=3,
                   help="bin count for ewd/efd (default 3)")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="regularization weight (default: 0, or 1 for SVC)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--out", metavar="PATH",
                   help="write the JSON report here (default: stdout)")
    p.add_argument("--trace", metavar="DIR",
                   help="write per-fold solver trace CSVs into this directory")
    p.add_argument("--bv-trials", type=int, default=0, metavar="N",
                   help="also estimate bias/variance from N rounds of "
                        "2-fold CV (default: off)")
    p.add_argument("--big-threshold", type=int, default=100_000,
                   help="instance count labeling a dataset Big (default 100000)")
    return p


def emit_report(report: dict, path) -> None:
    """Write the report as stably-ordered JSON (byte-identical for equal input)."""
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def emit_trace(trace, path) -> None:
    trace.write_csv(path)


def _spec_from_args(args) -> ExperimentSpec:
    return ExperimentSpec(
        classifier=args.classifier,
        discretize=args.discretize,
        disc_method=args.disc_method,
        bins=args.bins,
        lam=args.lam,
        solver=SolverConfig(solver=SOLVER_NAMES[args.solver], seed=args.seed),
        rounds=args.rounds,
        folds=args.folds,
        seed=args.seed,
    )


def run(args) -> int:
    try:
        text = Path(args.dataset).read_text()
    except OSError as exc:
        print(f"linbin: cannot read dataset: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        data = parse_arff(text)
    except DataError as exc:
        print(f"linbin: {args.dataset}: {exc}", file=sys.stderr)
        return EXIT_DATA
    if args.classifier == "SVC" and data.schema.n_classes > 2:
        print(f"linbin: {args.dataset} has {data.schema.n_classes} classes, "
              "but SVC needs a binary dataset; binarize the classes first "
              "or use -W SVC-OVA", file=sys.stderr)
        return EXIT_DATA
    spec = _spec_from_args(args)
    try:
        folds = cross_validate(spec, data)
        bv = bias_variance(spec, data, args.bv_trials) if args.bv_trials else None
    except DataError as exc:
        print(f"linbin: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"linbin: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    trace_dir = Path(args.trace) if args.trace else None
    if trace_dir is not None:
        trace_dir.mkdir(parents=True, exist_ok=True)
    fold_entries = []
    for fr in folds:
        trace_files = []
        if trace_dir is not None:
            for m, tr in enumerate(fr.traces):
                suffix = f"_m{m}" if len(fr.traces) > 1 else ""
                path = trace_dir / f"trace_r{fr.round_id}_f{fr.fold_id}{suffix}.csv"
                emit_trace(tr, path)
                trace_files.append(str(path))
        if args.verbose:
            for tr in fr.traces:
                for i, obj in enumerate(tr.objective):
                    print(f"round {fr.round_id} fold {fr.fold_id} "
                          f"iter {i}: objective={obj!r}", file=sys.stderr)
        fold_entries.append({
            "round": fr.round_id,
            "fold": fr.fold_id,
            "zero_one_loss": fr.zero_one,
            "rmse": fr.rmse,
            "train_seconds": fr.train_seconds,
            "test_seconds": fr.test_seconds,
            "trace_files": trace_files,
        })
    report = {
        "experiment": {
            "classifier": spec.classifier,
            "solver": args.solver,
            "discretize": spec.discretize,
            "disc_method": spec.disc_method,
            "bins": spec.bins,
            "lambda": spec.resolved_lambda(),
            "rounds": spec.rounds,
            "folds": spec.folds,
            "seed": spec.seed,
        },
        "dataset": {
            "path": args.dataset,
            "instances": data.n_instances,
            "attributes": data.schema.n_attributes,
            "classes": data.schema.n_classes,
            "size_category": size_category(data.n_instances,
                                           args.big_threshold),
        },
        "folds": fold_entries,
        "aggregate": {
            "zero_one_loss_mean": sum(f.zero_one for f in folds) / len(folds),
            "rmse_mean": sum(f.rmse for f in folds) / len(folds),
        },
        "bias_variance": None if bv is None else {
            "trials": args.bv_trials,
            "bias": bv.bias,
            "variance": bv.variance,
        },
    }
    emit_report(report, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return run(args)
    except NumericError as exc:
        print(f"linbin: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
