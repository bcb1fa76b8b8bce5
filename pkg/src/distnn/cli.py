"""Command-line entry point.

Subcommands: ``run`` (full experiment pipeline), ``verify-oracle``
(exact-enumeration checks of the samplers on a small synthetic instance),
``loocv`` (leave-one-out error curve for the nearest-neighbour baseline).
Exit codes: 0 success, 1 configuration error, 2 runtime error or failed
verification.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .data import Split, load_csv, standardize
from .experiment import (
    ConfigError,
    OracleConfig,
    load_config_file,
    make_config,
    run_experiment,
    verify_oracle,
    write_curve_csv,
)
from .knn import loocv_select_k


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the CLI contract
    reserves 2 for runtime failures, so remap usage errors to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_run_parser(subparsers) -> None:
    p = subparsers.add_parser(
        "run", parents=[], help="run samplers and baseline, write artifacts"
    )
    p.add_argument("--config", help="flat key = value config file; flags win")
    p.add_argument("--data", dest="data_path", help="dataset CSV path")
    p.add_argument(
        "--label-column", dest="label_column",
        help="label column name, or 0-based index if numeric",
    )
    p.add_argument("--model", choices=["dnn1", "dnn2", "dnn3"])
    p.add_argument("--epsilon", type=float, help="floor weight for dnn2")
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument(
        "--train-indices", dest="train_indices_path",
        help="file of 0-based training row indices, one per line",
    )
    p.add_argument("--test-indices", dest="test_indices_path")
    p.add_argument(
        "--standardize", dest="standardize_features",
        action=argparse.BooleanOptionalAction, default=None,
        help="standardize features with training statistics (default on)",
    )
    p.add_argument("--beta-prior-sd", dest="beta_prior_sd", type=float)
    p.add_argument(
        "--sigma-upper", dest="sigma_upper", type=float,
        help="upper limit of the uniform prior on sigma",
    )
    p.add_argument("--beta-step", dest="beta_step", type=float)
    p.add_argument("--sigma-step", dest="sigma_step", type=float)
    p.add_argument("--iterations", dest="n_iterations", type=int)
    p.add_argument("--burnin", dest="n_burnin", type=int)
    p.add_argument("--aux-sweeps", dest="aux_sweeps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument(
        "--method", choices=["exchange", "pseudolikelihood", "knn", "all"]
    )
    p.add_argument("--thin", type=int, help="posterior thinning for prediction")
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument(
        "--max-seconds", dest="max_seconds", type=float,
        help="wall-clock budget; chains checkpoint and exit cleanly",
    )


def _add_oracle_parser(subparsers) -> None:
    p = subparsers.add_parser(
        "verify-oracle",
        help="check samplers against exact enumeration on a small instance",
    )
    p.add_argument("--sites", type=int, default=6)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--model", choices=["dnn1", "dnn2", "dnn3"], default="dnn1")
    p.add_argument("--grid-max", type=float, default=4.0)
    p.add_argument("--grid-points", type=int, default=41)
    p.add_argument("--steps", type=int, default=300_000)
    p.add_argument("--burnin", type=int, default=1000)
    p.add_argument("--aux-sweeps", type=int, default=500)
    p.add_argument("--is-draws", type=int, default=20_000)
    p.add_argument("--is-sweeps", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=0.02)


def _add_loocv_parser(subparsers) -> None:
    p = subparsers.add_parser(
        "loocv", help="leave-one-out error curve for the k-nn baseline"
    )
    p.add_argument("--data", required=True, help="dataset CSV path")
    p.add_argument("--label-column", default="label")
    p.add_argument(
        "--standardize", action=argparse.BooleanOptionalAction, default=True
    )
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--output", help="write the curve as 'k,error' CSV here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distnn", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(subparsers)
    _add_oracle_parser(subparsers)
    _add_loocv_parser(subparsers)
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    file_values = load_config_file(args.config) if args.config else None
    flags = {
        key: getattr(args, key)
        for key in (
            "data_path", "label_column", "model", "epsilon", "train_fraction",
            "train_indices_path", "test_indices_path", "standardize_features",
            "beta_prior_sd", "sigma_upper", "beta_step", "sigma_step",
            "n_iterations", "n_burnin", "aux_sweeps", "seed", "method",
            "thin", "k_max", "output_dir", "max_seconds",
        )
    }
    if flags["label_column"] is not None and flags["label_column"].isdigit():
        flags["label_column"] = int(flags["label_column"])
    config = make_config(file_values, **flags)
    result = run_experiment(config)
    for name, entry in sorted(result.summary["methods"].items()):
        rate = entry.get("misclassification_rate")
        rate_text = "n/a" if rate is None else f"{rate:.4f}"
        extra = ""
        if "acceptance_rate" in entry:
            extra = f", acceptance {entry['acceptance_rate']:.3f}"
        if "k_selected" in entry:
            extra = f", k={entry['k_selected']}"
        print(f"{name}: misclassification {rate_text}{extra}")
    if result.summary["interrupted"]:
        print("note: wall-clock budget reached; traces were checkpointed early")
    print(f"wrote {len(result.output_files)} files to {config.output_dir}")
    return 0


def _cmd_verify_oracle(args: argparse.Namespace) -> int:
    config = OracleConfig(
        n_sites=args.sites,
        n_classes=args.classes,
        model=args.model,
        beta_grid_max=args.grid_max,
        grid_points=args.grid_points,
        n_steps=args.steps,
        n_burnin=args.burnin,
        aux_sweeps=args.aux_sweeps,
        is_draws=args.is_draws,
        is_sweeps=args.is_sweeps,
        seed=args.seed,
        tv_tolerance=args.tolerance,
    )
    report = verify_oracle(config)
    print(report.render())
    return 0 if report.passed else 2


def _cmd_loocv(args: argparse.Namespace) -> int:
    label_column: str | int = args.label_column
    if isinstance(label_column, str) and label_column.isdigit():
        label_column = int(label_column)
    data = load_csv(args.data, label_column)
    if args.standardize:
        all_rows = Split(
            train_indices=np.arange(data.n_observations),
            test_indices=np.empty(0, dtype=np.int64),
        )
        data = standardize(data, reference=all_rows)
    k_selected, curve = loocv_select_k(data, args.k_max)
    print(f"selected k = {k_selected} (error {curve[k_selected - 1]:.4f})")
    if args.output:
        write_curve_csv(args.output, "k,error", curve)
        print(f"wrote {args.output}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify-oracle":
            return _cmd_verify_oracle(args)
        if args.command == "loocv":
            return _cmd_loocv(args)
        raise AssertionError("unreachable")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
