"""Score a synthetic pool with every method and print the Spearman matrix.

Thin wrapper around `infoselect correlate`; all heavy lifting lives in the
package. Writes scores.csv, correlation.csv and correlation.json to --out.
"""

import argparse
import json
import sys
from pathlib import Path

from infoselect.cli import main as cli_main


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n", type=int, default=2000, help="synthetic dataset size")
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--classes", type=int, default=10)
    parser.add_argument("--train-size", type=int, default=80)
    parser.add_argument("--pool-size", type=int, default=1000)
    parser.add_argument("--eval-size", type=int, default=200)
    parser.add_argument("--mc-samples", type=int, default=1000)
    parser.add_argument("--methods", default=None, help="comma-separated method ids")
    parser.add_argument("--out", default="runs/correlation")
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    Path(args.out).mkdir(parents=True, exist_ok=True)
    argv = [
        "correlate",
        "--seed", str(args.seed),
        "--n", str(args.n),
        "--dim", str(args.dim),
        "--classes", str(args.classes),
        "--train-size", str(args.train_size),
        "--pool-size", str(args.pool_size),
        "--eval-size", str(args.eval_size),
        "--mc-samples", str(args.mc_samples),
        "--out", args.out,
    ]
    if args.methods:
        argv += ["--methods", args.methods]
    rc = cli_main(argv)
    if rc != 0:
        return rc

    report = json.loads((Path(args.out) / "correlation.json").read_text())
    names = report["methods"]
    width = max(len(name) for name in names) + 2
    print()
    print(" " * width + "".join(f"{name:>{width}}" for name in names))
    for name, row in zip(names, report["matrix"]):
        cells = "".join(f"{value:>{width}.3f}" for value in row)
        print(f"{name:>{width}}{cells}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
