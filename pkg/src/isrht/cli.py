"""Command-line entry point: ``isrht {run,synth,project,inspect}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import projections
from .data import apply_scaler, fit_scaler, parse_libsvm, write_libsvm
from .errors import ParameterError
from .experiment import ExperimentConfig, report_emit, run_experiment
from .projections import METHODS, SRHT_FAMILY, ProjectionModel
from .synthetic import generate_synthetic


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.output:
        cfg.output = args.output
    report = run_experiment(cfg)
    if cfg.output:
        report_emit(report, cfg.format, cfg.output)
    print(f"{'method':<18}{'r':>6}{'reps':>6}{'accuracy':>12}{'std':>10}{'fit_ms':>10}")
    for row in report.aggregates():
        print(f"{row['method']:<18}{row['r']:>6}{row['repetitions']:>6}"
              f"{row['accuracy_mean']:>12.4f}{row['accuracy_std']:>10.4f}{row['fit_ms_mean']:>10.2f}")
    return 0


def _cmd_synth(args) -> int:
    ds = generate_synthetic(args.n, seed=args.seed)
    write_libsvm(args.out, ds.X, ds.y)
    return 0


def _cmd_project(args) -> int:
    train = parse_libsvm(args.train, n_features=args.n_features)
    params = fit_scaler(train.X)
    X = apply_scaler(params, train.X)
    y = train.y if args.method == "isrht-supervised" else None
    if args.sparse_pipeline:
        if args.method not in SRHT_FAMILY:
            raise ParameterError(f"--sparse-pipeline needs one of {SRHT_FAMILY}")
        model, Z = projections.fit_sparse_pipeline(X, y, args.method, args.r, r_prime=args.r_prime,
                                                   a=args.a, seed=args.seed)
    else:
        model, Z = projections.fit_transform(X, y, args.method, args.r, a=args.a, seed=args.seed)
    if args.model_out:
        model.save(args.model_out)
    write_libsvm(args.out, Z, train.y)
    if args.test:
        test = parse_libsvm(args.test, n_features=train.d, label_map=train.label_map)
        Zt = projections.transform(model, apply_scaler(params, test.X))
        write_libsvm(args.test_out or f"{args.out}.test", Zt, test.y)
    return 0


def _cmd_inspect(args) -> int:
    model = ProjectionModel.load(args.model)
    summary = {"method": model.method, "d": model.d, "d2": model.d2, "r": model.r}
    if model.r_prime is not None:
        summary["r_prime"] = model.r_prime
    if model.signs is not None:
        summary["positive_signs"] = int(np.sum(model.signs > 0))
    if model.selection is not None:
        summary["strategy"] = model.selection.strategy
        summary["indices"] = model.selection.indices.tolist()
        summary["scales"] = model.selection.scales.tolist()
    if model.R is not None:
        summary["R_shape"] = list(model.R.shape)
        summary["R_nonzero_fraction"] = float(np.mean(model.R != 0))
    if model.sketch is not None:
        summary["sketch_width"] = model.sketch.width
    print(json.dumps(summary, indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isrht", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment described by a JSON config")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--output", help="override the config's output path")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("synth", help="write the two-Gaussian toy dataset in LIBSVM format")
    p.add_argument("--n", type=int, required=True, help="samples per class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("project", help="fit a projection and write the embedding")
    p.add_argument("--train", required=True, type=Path)
    p.add_argument("--test", type=Path)
    p.add_argument("--method", choices=METHODS, default="isrht-supervised")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-features", type=int)
    p.add_argument("--sparse-pipeline", action="store_true")
    p.add_argument("--r-prime", type=int)
    p.add_argument("--model-out", type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--test-out", type=Path)
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("inspect", help="print a serialized projection model")
    p.add_argument("model", type=Path)
    p.set_defaults(func=_cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"isrht: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
