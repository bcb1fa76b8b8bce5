"""Write the classic Iris and Wine benchmark tables as CSV files.

Uses the copies bundled with scikit-learn, so no network access is needed.
Output files have one header row, numeric feature columns, and a trailing
string ``label`` column, matching what the loader expects.

Usage: python3 scripts/make_benchmark_csvs.py [output_dir]
"""

from __future__ import annotations

import os
import sys

from sklearn.datasets import load_iris, load_wine


def write_csv(path: str, loader) -> None:
    bunch = loader()
    feature_names = [
        name.replace(" (cm)", "").replace(" ", "_").replace("/", "_")
        for name in bunch.feature_names
    ]
    lines = [",".join(feature_names + ["label"])]
    for row, target in zip(bunch.data, bunch.target):
        values = [format(v, ".17g") for v in row]
        lines.append(",".join(values + [str(bunch.target_names[target])]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path} ({len(lines) - 1} rows)")


def main() -> None:
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data"
    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, "iris.csv"), load_iris)
    write_csv(os.path.join(out_dir, "wine.csv"), load_wine)


if __name__ == "__main__":
    main()
