#!/usr/bin/env python3
"""Recover per-task case counts for the Nexus suite from reported accuracies.

Each reported accuracy is 100*k/n for some integer k, shown with two decimals
(rounded or truncated). For every task we list the denominators n <= LIMIT
that can produce all of that task's reported values, then check how well the
smallest candidates reproduce the weighted (W) and unweighted (U) columns.

Usage: derive_nexus_counts.py [--limit N] [--json]
"""

import argparse
import json
import math

TASKS = ["NVDLibrary", "VT", "Places", "Climate", "OTX", "VT (N)", "VT (P)", "CVECPE"]

# Prompting rows: eight per-task accuracies, then reported W and U.
ROWS = {
    "LLaMA-3.1-8B / No Thought": [38.46, 68.87, 16.67, 9.64, 82.61, 8.16, 14.29, 1.79, 35.40, 30.06],
    "LLaMA-3.1-8B / CoT": [50.00, 66.89, 8.33, 12.18, 84.78, 8.16, 4.76, 5.36, 36.71, 30.06],
    "LLaMA-3.1-8B / Template": [43.59, 68.87, 18.75, 13.20, 83.70, 12.24, 19.05, 5.36, 38.01, 33.09],
    "Mistral-7B / No Thought": [24.35, 12.58, 4.17, 7.11, 20.65, 0.00, 0.00, 3.57, 10.84, 9.05],
    "Mistral-7B / CoT": [35.90, 48.34, 8.33, 5.58, 78.26, 0.00, 0.00, 1.79, 26.01, 22.26],
    "Mistral-7B / Template": [41.03, 44.37, 8.33, 6.09, 63.04, 0.00, 0.00, 3.57, 25.29, 20.80],
    "Mistral-Nemo-12B / No Thought": [41.03, 37.09, 8.33, 6.09, 79.35, 0.00, 4.76, 0.00, 25.72, 22.08],
    "Mistral-Nemo-12B / CoT": [42.31, 56.29, 10.42, 5.58, 84.78, 2.04, 19.05, 1.79, 31.50, 27.78],
    "Mistral-Nemo-12B / Template": [50.00, 58.94, 14.58, 7.61, 80.43, 0.00, 14.29, 1.79, 32.95, 28.46],
    "Qwen-2.5-14B / No Thought": [60.25, 79.47, 29.17, 12.69, 90.22, 8.16, 28.57, 0.00, 43.21, 38.57],
    "Qwen-2.5-14B / CoT": [73.07, 78.14, 10.42, 9.14, 89.13, 4.08, 19.05, 0.00, 41.33, 35.38],
    "Qwen-2.5-14B / Template": [79.49, 76.16, 25.00, 10.15, 89.13, 4.08, 33.33, 8.93, 44.07, 40.78],
}


def renders_as(n, shown):
    # Integer arithmetic in hundredths of a percent avoids float edge cases.
    target = round(shown * 100)
    for k in range(n + 1):
        exact = 10000 * k / n
        if round(exact) == target or math.floor(exact + 1e-9) == target:
            return True
    return False


def candidates(task, limit):
    values = sorted({row[task] for row in ROWS.values()})
    return [n for n in range(1, limit + 1) if all(renders_as(n, v) for v in values)]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--limit", type=int, default=400)
    parser.add_argument("--json", action="store_true", help="print the chosen counts as JSON only")
    args = parser.parse_args()

    counts = {}
    for t, name in enumerate(TASKS):
        found = candidates(t, args.limit)
        if not found:
            raise SystemExit(f"no denominator <= {args.limit} fits task {name}")
        counts[name] = found[0]
        if not args.json:
            print(f"{name:12s} candidates {found[:5]}")

    if args.json:
        print(json.dumps(counts))
        return

    n = list(counts.values())
    print()
    print(f"{'row':32s} {'W':>9s} {'W rep':>7s} {'U':>9s} {'U rep':>7s}")
    for label, row in ROWS.items():
        acc = row[:8]
        w = sum(a * c for a, c in zip(acc, n)) / sum(n)
        u = sum(acc) / len(acc)
        print(f"{label:32s} {w:9.4f} {row[8]:7.2f} {u:9.4f} {row[9]:7.2f}")
    print()
    print(json.dumps(counts))


if __name__ == "__main__":
    main()
