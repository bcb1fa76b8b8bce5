#!/usr/bin/env python3
"""Reproduce the benchmark table: mean test misclassification over five
seeded 25% train/test splits of Iris and Wine, for the Gaussian-weight field
model (exchange and pseudolikelihood fits) and the k-nn baseline.

Runs the command-line entry point once per (dataset, seed) so the full
artifact path is exercised, then aggregates the summary files.

Usage:
    python3 scripts/reproduce_benchmarks.py [--output-root results/benchmarks]
        [--iterations 4000] [--burnin 2000] [--aux-sweeps 200] [--seeds 5]
"""

import argparse
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from distnn.cli import main as distnn_main


def run_one(data_path, seed, args):
    out = os.path.join(args.output_root, f"{stem(data_path)}-seed{seed}")
    code = distnn_main([
        "run",
        "--data", data_path,
        "--label-column", "label",
        "--model", "dnn1",
        "--method", "all",
        "--train-fraction", "0.25",
        "--iterations", str(args.iterations),
        "--burnin", str(args.burnin),
        "--aux-sweeps", str(args.aux_sweeps),
        "--seed", str(seed),
        "--output-dir", out,
    ])
    if code != 0:
        raise SystemExit(f"run failed with exit code {code}: {out}")
    with open(os.path.join(out, "summary.json")) as fh:
        return json.load(fh)


def stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output-root", default="results/benchmarks")
    parser.add_argument("--iterations", type=int, default=4000)
    parser.add_argument("--burnin", type=int, default=2000)
    parser.add_argument("--aux-sweeps", type=int, default=200)
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument(
        "--data", nargs="+", default=["data/iris.csv", "data/wine.csv"]
    )
    args = parser.parse_args()

    rows = []
    for data_path in args.data:
        errors = {"exchange": [], "pseudolikelihood": [], "knn": []}
        for seed in range(args.seeds):
            summary = run_one(data_path, seed, args)
            for method, entry in summary["methods"].items():
                errors[method].append(entry["misclassification_rate"])
        for method, vals in errors.items():
            vals = [v for v in vals if v is not None]
            if vals:
                rows.append((stem(data_path), method, np.mean(vals), np.std(vals)))

    width = max(len("dataset"), max(len(r[0]) for r in rows))
    print(f"\n{'dataset':<{width}}  {'method':<18}  {'mean error':>10}  {'sd':>7}")
    for dataset, method, mean, sd in rows:
        print(f"{dataset:<{width}}  {method:<18}  {100 * mean:9.2f}%  {100 * sd:6.2f}%")


if __name__ == "__main__":
    main()
