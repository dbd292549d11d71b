"""Run the label-and-refit loop and print accuracy by round.

Thin wrapper around `infoselect simulate`; compares the chosen selection
method against the random baseline on the same splits. Writes simulate.csv
to --out.
"""

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path

from infoselect.cli import main as cli_main
from infoselect.harness import SELECT_METHODS


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
    parser.add_argument("--method", default="greedy_eig_logdet", choices=SELECT_METHODS)
    parser.add_argument("--batch-size", type=int, default=10)
    parser.add_argument("--rounds", type=int, default=5)
    parser.add_argument("--out", default="runs/simulation")
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    Path(args.out).mkdir(parents=True, exist_ok=True)
    rc = cli_main([
        "simulate",
        "--seed", str(args.seed),
        "--n", str(args.n),
        "--dim", str(args.dim),
        "--classes", str(args.classes),
        "--train-size", str(args.train_size),
        "--pool-size", str(args.pool_size),
        "--eval-size", str(args.eval_size),
        "--mc-samples", str(args.mc_samples),
        "--method", args.method,
        "--batch-size", str(args.batch_size),
        "--rounds", str(args.rounds),
        "--out", args.out,
    ])
    if rc != 0:
        return rc

    curves = defaultdict(list)
    with open(Path(args.out) / "simulate.csv", newline="") as handle:
        for row in csv.DictReader(handle):
            curves[row["method"]].append((int(row["labeled_count"]), float(row["accuracy"])))
    print()
    print(f"{'method':>20}  {'labels':>6}  accuracy")
    for method, points in curves.items():
        for count, accuracy in points:
            print(f"{method:>20}  {count:>6}  {accuracy:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
