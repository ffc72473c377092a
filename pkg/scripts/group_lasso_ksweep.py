#!/usr/bin/env python3
"""Group-lasso hinge benchmark: sweep the number of sampled blocks K over
{1, 3, 9, 21, 63} on the 2604-dim / 63-group synthetic instance, plus the
scalar-stepsize baseline. Objective vs passes/time under results/group-lasso/.
"""

import argparse
from pathlib import Path

from sepsaddle.bench import RunConfig, compare


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lam", type=float, default=1e-4)
    parser.add_argument("--passes", type=int, default=800)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--samples", type=int, default=2000)
    parser.add_argument("--gl-active", type=float, default=0.4)
    parser.add_argument("--gl-noise", type=float, default=0.8)
    parser.add_argument("--out-dir", default="results/group-lasso")
    args = parser.parse_args()

    base = dict(problem="group-lasso", lam=args.lam, seed=args.seed,
                passes=args.passes, gl_samples=args.samples,
                gl_active=args.gl_active, gl_noise=args.gl_noise)
    configs = [RunConfig(solver="spbcd", K=k, **base) for k in (1, 3, 9, 21, 63)]
    configs.append(RunConfig(solver="pdcp", **base))
    paths = compare(configs, Path(args.out_dir), metric="objective")
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
