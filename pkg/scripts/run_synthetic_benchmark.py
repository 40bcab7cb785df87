#!/usr/bin/env python3
"""Desk-scale validity benchmark on a synthetic labeled dataset.

Generates the default 50x40 clustered dataset, sweeps the packing threshold,
then runs both correlation protocols and prints the aggregated tables.

Usage: python scripts/run_synthetic_benchmark.py [--seed S] [--n-fixed N]
       [--n-growing N] [--runs R] [--bias {uniform,similar,most-similar}]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from chemspace.distances import TanimotoOracle
from chemspace.protocols import (
    DEFAULT_PROTOCOL_MEASURES,
    protocol_fixed,
    protocol_growing,
    threshold_sweep,
)
from chemspace.synthetic import SyntheticConfig, generate_synthetic


def print_stats(title, stats, ascending):
    print(f"\n{title}")
    print(f"{'measure':<22} {'mean':>10} {'dev':>8}  per-run")
    print("-" * 72)
    for stat in sorted(stats, key=lambda s: s.mean, reverse=not ascending):
        runs = " ".join(f"{v:.2f}" for v in stat.per_run[:5])
        extra = " ..." if len(stat.per_run) > 5 else ""
        flag = f"  [degenerate x{stat.degenerate_runs}]" if stat.degenerate_runs else ""
        print(f"{stat.measure:<22} {stat.mean:>10.3f} {stat.dev:>8.3f}  {runs}{extra}{flag}")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-fixed", type=int, default=200)
    parser.add_argument("--n-growing", type=int, default=500)
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--repeats", type=int, default=100)
    parser.add_argument("--bias", default="similar", choices=("uniform", "similar", "most-similar"))
    args = parser.parse_args()

    print("generating synthetic dataset (50 classes x 40 samples, 256 bits) ...")
    dataset = generate_synthetic(SyntheticConfig(), seed=args.seed)
    oracle = TanimotoOracle(dataset)
    oracle.full_matrix()

    start = time.perf_counter()
    sweep = threshold_sweep(
        dataset,
        protocol="fixed",
        t_grid=(0.3, 0.4, 0.5, 0.6, 0.7, 0.8),
        seed=args.seed,
        n=args.n_fixed,
        repeats=max(20, args.repeats // 2),
        runs=3,
        oracle=oracle,
    )
    print(f"\nthreshold sweep (fixed-size, n={args.n_fixed}):")
    for row in sweep.rows:
        print(f"  t={row['t']:.2f}  spearman={row['mean']:.4f} +- {row['dev']:.4f}")
    print(f"best t: {sweep.best_t}")

    measures = [m for m in DEFAULT_PROTOCOL_MEASURES if not m.startswith("circles")]
    measures.append(f"circles:t={sweep.best_t}")

    fixed = protocol_fixed(
        dataset,
        n=args.n_fixed,
        measures=measures,
        seed=args.seed,
        repeats=args.repeats,
        runs=args.runs,
        oracle=oracle,
    )
    print_stats(
        f"fixed-size setting (n={args.n_fixed}, {args.runs} runs): spearman vs gold standard, higher is better",
        fixed.stats,
        ascending=False,
    )

    growing = protocol_growing(
        dataset,
        n=args.n_growing,
        measures=measures,
        bias=args.bias,
        seed=args.seed,
        runs=args.runs,
        oracle=oracle,
    )
    print_stats(
        f"growing-size setting (n={args.n_growing}, bias={args.bias}): DTW vs gold standard, lower is better",
        growing.stats,
        ascending=True,
    )
    print(f"\ntotal time: {time.perf_counter() - start:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
