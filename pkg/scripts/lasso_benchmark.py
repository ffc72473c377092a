#!/usr/bin/env python3
"""Lasso benchmark: block engine vs batch baselines on one generated problem.

Writes traces, a combined CSV, and objective-vs-pass / objective-vs-time
charts under results/lasso/. The data uses raw (unnormalized) standard-normal
columns and the sampled dual penalty (sigma_scale = K/J), the configuration
the reference results correspond to; pass --normalize to use unit columns.
"""

import argparse
from pathlib import Path

from sepsaddle.bench import RunConfig, compare


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m", type=int, default=1000)
    parser.add_argument("--n", type=int, default=5000)
    parser.add_argument("--d", type=int, default=500)
    parser.add_argument("--K", type=int, default=100)
    parser.add_argument("--passes", type=int, default=100)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--normalize", action="store_true")
    parser.add_argument("--out-dir", default="results/lasso")
    args = parser.parse_args()

    base = dict(problem="lasso", m=args.m, n=args.n, d=args.d, seed=args.seed,
                passes=args.passes, normalize=args.normalize)
    configs = [
        RunConfig(solver="spbcd", K=args.K, sigma_scale=args.K / args.n, **base),
        RunConfig(solver="pdcp", **base),
        RunConfig(solver="ista", **base),
        RunConfig(solver="fista", **base),
    ]
    paths = compare(configs, Path(args.out_dir), metric="residual")
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
