#!/usr/bin/env python3
"""Classify every measure by the two validity axioms and print the table.

Usage: python scripts/run_axiom_classification.py [--trials N] [--seed S]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from chemspace.axioms import quadrant_table


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    start = time.perf_counter()
    table = quadrant_table(trials=args.trials, seed=args.seed)
    elapsed = time.perf_counter() - start

    mark = {True: "yes", False: "no"}
    print(f"{'measure':<22} {'subadditive':<12} {'dissimilar':<12} note")
    print("-" * 78)
    for row in table["reports"]:
        note = row["subadditivity_check"].get("note", "")
        if not row["subadditive"]:
            ce = row["subadditivity_check"]["counterexample"]
            note = f"violated ({ce['side']} side): {ce['description']}"
        print(f"{row['measure']:<22} {mark[row['subadditive']]:<12} {mark[row['dissimilar']]:<12} {note}")
    print("-" * 78)
    print(f"matches expected classification: {table['matches_expected']}  ({elapsed:.1f}s)")
    return 0 if table["matches_expected"] else 1


if __name__ == "__main__":
    sys.exit(main())
