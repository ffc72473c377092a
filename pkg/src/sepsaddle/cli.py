"""Command-line front end: ``generate``, ``run``, and ``compare``.

Exit codes: 0 success, 2 bad configuration or arguments, 3 solver numeric
failure (partial trace flushed when an output path was given).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    PROBLEMS,
    SOLVERS,
    RunConfig,
    compare,
    config_from_sources,
    parse_config_file,
    run_experiment,
)
from .datafiles import save_problem_dir
from .errors import ConfigError, FormatError, RunAborted
from .problems import gen_group_lasso, gen_lasso, gen_rpca, rpca_default_penalties
from .spbcd import STEPSIZE_RULES


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--problem", choices=PROBLEMS)
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--passes", type=int)
    p.add_argument("--K", type=int, dest="K")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="max parallel block workers")
    p.add_argument("--rule", choices=STEPSIZE_RULES)
    p.add_argument("--sigma-override", type=float, dest="sigma_override",
                   help="manual constant dual penalty")
    p.add_argument("--sigma-scale", type=float, dest="sigma_scale",
                   help="multiplier on the adaptive dual penalty")
    p.add_argument("--out", help="trace CSV path")
    p.add_argument("--label", help="series label in compare outputs")
    p.add_argument("--gap", action="store_const", const=True,
                   help="emit the saddle gap column (tiny lasso only)")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--no-normalize", action="store_const", const=False,
                   dest="normalize", help="skip unit-norm column scaling (lasso)")
    p.add_argument("--r", type=int, dest="rank")
    p.add_argument("--lam", type=float)
    p.add_argument("--gl-samples", type=int, dest="gl_samples")
    p.add_argument("--gl-active", type=float, dest="gl_active")
    p.add_argument("--gl-noise", type=float, dest="gl_noise")
    p.add_argument("--path", help="problem directory (with --problem file)")


_RUN_FIELDS = ("problem", "solver", "passes", "K", "seed", "workers", "rule",
               "sigma_override", "sigma_scale", "out", "label", "gap", "m", "n",
               "d", "normalize", "rank", "lam", "gl_samples", "gl_active",
               "gl_noise", "path")


def _config_from_args(args) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else None
    flag_values = {name: getattr(args, name, None) for name in _RUN_FIELDS}
    return config_from_sources(file_values, flag_values)


def _cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else 0
    if args.problem == "lasso":
        m, n, d = args.m or 1000, args.n or 5000, args.d or 500
        normalize = args.normalize if args.normalize is not None else True
        A, b, lam = gen_lasso(m, n, d, seed, normalize=normalize)
        root = save_problem_dir(args.out, "lasso", {"A": A, "b": b},
                                {"m": m, "n": n, "d": d, "seed": seed,
                                 "normalize": normalize, "lam": lam})
    elif args.problem == "rpca":
        m, n, r = args.m or 200, args.n or 500, args.rank or 10
        B = gen_rpca(m, n, r, seed)
        mu2, mu3 = rpca_default_penalties(B)
        root = save_problem_dir(args.out, "rpca", {"B": B},
                                {"m": m, "n": n, "rank": r, "seed": seed,
                                 "mu2": mu2, "mu3": mu3})
    else:
        n_samples = args.gl_samples or 2000
        active = args.gl_active if args.gl_active is not None else 0.2
        noise = args.gl_noise if args.gl_noise is not None else 0.1
        features, labels, groups = gen_group_lasso(
            seed, n_samples=n_samples, active_fraction=active, label_noise=noise)
        root = save_problem_dir(args.out, "group-lasso",
                                {"features": features, "labels": labels},
                                {"groups": list(groups.group_sizes), "seed": seed,
                                 "n_samples": n_samples, "active_fraction": active,
                                 "label_noise": noise,
                                 "lam": args.lam if args.lam is not None else 1e-4})
    print(f"wrote {args.problem} problem to {root}")
    return 0


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    trace = run_experiment(config)
    last = trace[-1]
    print(f"{config.solver} on {config.problem}: {len(trace)} passes, "
          f"objective {last.objective:.9g}, residual {last.residual:.3e}"
          + (f", trace -> {config.out}" if config.out else ""))
    return 0


def _cmd_compare(args) -> int:
    configs = []
    for path in args.config:
        values = parse_config_file(path)
        values.setdefault("out", str(Path(args.out_dir) / (Path(path).stem + ".csv")))
        configs.append(config_from_sources(values, {}))
    paths = compare(configs, args.out_dir, metric=args.metric)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepsaddle",
        description="Separable saddle-point solvers and benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write a synthetic problem directory")
    p_gen.add_argument("--problem", choices=("lasso", "rpca", "group-lasso"),
                       required=True)
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("--m", type=int)
    p_gen.add_argument("--n", type=int)
    p_gen.add_argument("--d", type=int)
    p_gen.add_argument("--r", type=int, dest="rank")
    p_gen.add_argument("--no-normalize", action="store_const", const=False,
                       dest="normalize")
    p_gen.add_argument("--lam", type=float)
    p_gen.add_argument("--gl-samples", type=int, dest="gl_samples")
    p_gen.add_argument("--gl-active", type=float, dest="gl_active")
    p_gen.add_argument("--gl-noise", type=float, dest="gl_noise")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.set_defaults(func=_cmd_generate)

    p_run = sub.add_parser("run", help="run one solver and write its trace")
    _add_run_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="run several configs on one problem")
    p_cmp.add_argument("--config", action="append", required=True,
                       help="config file; repeat for each series")
    p_cmp.add_argument("--out-dir", required=True)
    p_cmp.add_argument("--metric", choices=("objective", "residual", "gap"),
                       default="objective")
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RunAborted as exc:
        print(f"solver aborted: {exc} ({len(exc.trace)} passes completed)",
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
