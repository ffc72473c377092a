"""Benchmark harness: run configurations, trace CSV files, and side-by-side
comparisons with SVG charts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import baselines, spbcd
from .datafiles import groups_from_meta, load_libsvm, load_problem_dir
from .errors import ConfigError, RunAborted
from .problems import (
    SepCCSPInstance,
    gen_group_lasso,
    gen_lasso,
    gen_rpca,
    make_group_lasso_hinge,
    make_lasso,
    make_rpca,
    rpca_default_penalties,
)
from .svgplot import AxisSpec, Series, render_svg

SOLVERS = ("spbcd", "pdcp", "preconditioned-pdcp", "ista", "fista")
PROBLEMS = ("lasso", "group-lasso", "rpca", "file")

DEFAULT_GROUP_LASSO_LAM = 1e-4
_GAP_MAX_DIM = 500


@dataclass
class TraceRecord:
    pass_index: int
    elapsed_ms: float
    objective: float
    residual: float
    gap: float | None = None


@dataclass
class RunConfig:
    """One benchmark run: a problem source, a solver, and its knobs."""

    problem: str = "lasso"
    solver: str = "spbcd"
    passes: int = 30
    K: int = 1
    seed: int = 0
    workers: int = 1
    rule: str = "adaptive-l1"
    sigma_override: float | None = None
    sigma_scale: float = 1.0
    out: str | None = None
    label: str | None = None
    gap: bool = False
    # lasso generator (defaults resolved per problem)
    m: int | None = None
    n: int | None = None
    d: int | None = None
    normalize: bool = True
    # low-rank/sparse generator
    rank: int | None = None
    # group lasso
    lam: float | None = None
    gl_samples: int = 2000
    gl_active: float = 0.2
    gl_noise: float = 0.1
    # file source
    path: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; expected one of {PROBLEMS}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; expected one of {SOLVERS}")
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if self.passes < 1:
            raise ConfigError("passes must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.problem == "file" and not self.path:
            raise ConfigError("problem 'file' needs --path")
        if self.problem != "file" and self.path:
            raise ConfigError("--path is only valid with --problem file")
        if self.solver in ("ista", "fista") and self.problem not in ("lasso", "file"):
            raise ConfigError(f"solver {self.solver!r} only applies to lasso problems")

    def sizes(self) -> tuple:
        if self.problem == "lasso":
            return (self.m or 1000, self.n or 5000, self.d or 500)
        if self.problem == "rpca":
            return (self.m or 200, self.n or 500, self.rank or 10)
        return ()

    def problem_key(self) -> tuple:
        """Identity of the generated data; compare() refuses mixed keys."""
        if self.problem == "lasso":
            return ("lasso", self.seed, *self.sizes(), self.normalize)
        if self.problem == "rpca":
            return ("rpca", self.seed, *self.sizes())
        if self.problem == "group-lasso":
            return ("group-lasso", self.seed, self.gl_samples, self.gl_active,
                    self.gl_noise, self.lam or DEFAULT_GROUP_LASSO_LAM)
        return ("file", str(Path(self.path).resolve()), self.lam)

    def series_label(self) -> str:
        if self.label:
            return self.label
        if self.solver == "spbcd":
            return f"spbcd-K{self.K}"
        return self.solver


@dataclass
class ProblemBundle:
    instance: SepCCSPInstance
    lasso_data: tuple | None = None  # (A, b, lam) when the problem is a lasso
    reference: dict = field(default_factory=dict)


def build_problem(config: RunConfig) -> ProblemBundle:
    if config.problem == "lasso":
        m, n, d = config.sizes()
        A, b, lam = gen_lasso(m, n, d, config.seed, normalize=config.normalize)
        return ProblemBundle(make_lasso(A, b, lam), lasso_data=(A, b, lam))
    if config.problem == "rpca":
        m, n, r = config.sizes()
        B = gen_rpca(m, n, r, config.seed)
        mu2, mu3 = rpca_default_penalties(B)
        return ProblemBundle(make_rpca(B, mu2, mu3))
    if config.problem == "group-lasso":
        features, labels, groups = gen_group_lasso(
            config.seed, n_samples=config.gl_samples,
            active_fraction=config.gl_active, label_noise=config.gl_noise)
        lam = config.lam or DEFAULT_GROUP_LASSO_LAM
        return ProblemBundle(make_group_lasso_hinge(features, labels, groups, lam))
    return _load_file_problem(config)


def _load_file_problem(config: RunConfig) -> ProblemBundle:
    kind, arrays, meta = load_problem_dir(config.path)
    if kind == "lasso":
        A = arrays["A"]
        b = arrays["b"].values[:, 0]
        lam = config.lam or float(meta["lam"])
        return ProblemBundle(make_lasso(A, b, lam), lasso_data=(A, b, lam))
    if kind == "rpca":
        B = arrays["B"].values
        if "mu2" in meta and "mu3" in meta:
            mu2, mu3 = float(meta["mu2"]), float(meta["mu3"])
        else:
            mu2, mu3 = rpca_default_penalties(B)
        return ProblemBundle(make_rpca(B, mu2, mu3))
    if kind == "group-lasso":
        libsvm = Path(config.path) / "features.libsvm"
        if "features" in arrays:
            features = arrays["features"]
            labels = arrays["labels"].values[:, 0]
        elif libsvm.exists():
            groups = groups_from_meta(meta)
            features, labels = load_libsvm(libsvm, num_features=groups.total)
        else:
            raise ConfigError(f"{config.path}: no features.csv or features.libsvm")
        groups = groups_from_meta(meta)
        lam = config.lam or float(meta.get("lam", DEFAULT_GROUP_LASSO_LAM))
        return ProblemBundle(make_group_lasso_hinge(features, labels, groups, lam))
    raise ConfigError(f"unknown problem kind {kind!r} in {config.path}")


def _ensure_reference(bundle: ProblemBundle) -> None:
    """Attach a reference objective for suboptimality residual reporting."""
    instance = bundle.instance
    if instance.residual_kind != "suboptimality" or instance.reference_objective is not None:
        return
    if "objective" not in bundle.reference:
        if bundle.lasso_data is not None:
            A, b, lam = bundle.lasso_data
            _, obj = baselines.fista_reference(A, b, lam, tol=1e-10, max_passes=50_000)
        else:
            x_ref, _ = baselines.preconditioned_reference(instance, tol=1e-9,
                                                          max_passes=50_000)
            obj = instance.objective(x_ref)
        bundle.reference["objective"] = obj
    instance.reference_objective = bundle.reference["objective"]


def _gap_evaluator(config: RunConfig, bundle: ProblemBundle):
    """Saddle-referenced gap L(x, y*) - L(x*, y) for tiny lasso problems."""
    if not config.gap:
        return None
    instance = bundle.instance
    if bundle.lasso_data is None or instance.n > _GAP_MAX_DIM:
        raise ConfigError(
            "gap reporting is only available for lasso problems with "
            f"n <= {_GAP_MAX_DIM}"
        )
    if "saddle" not in bundle.reference:
        A, b, lam = bundle.lasso_data
        x_star, _ = baselines.fista_reference(A, b, lam, tol=1e-12, max_passes=200_000)
        y_star = instance.coupling.matvec(x_star) - b
        bundle.reference["saddle"] = (x_star, y_star)
    x_star, y_star = bundle.reference["saddle"]
    l_star = instance.lagrangian(x_star, y_star)

    def gap_at(x, y):
        return (instance.lagrangian(x, y_star) - l_star
                + l_star - instance.lagrangian(x_star, y))

    return gap_at


def run_experiment(config: RunConfig, bundle: ProblemBundle | None = None):
    """Build the problem, run the configured solver, return the trace (and
    write it to ``config.out`` when set)."""
    config.validate()
    if bundle is None:
        bundle = build_problem(config)
    instance = bundle.instance
    _ensure_reference(bundle)
    gap_at = _gap_evaluator(config, bundle)

    def record(pass_index, x, y, seconds):
        gap = gap_at(x, y) if gap_at is not None else None
        return TraceRecord(pass_index, seconds * 1000.0,
                           instance.objective(x), instance.residual(x), gap)

    try:
        trace = _dispatch(config, bundle, record)
    except RunAborted as exc:
        if config.out:
            write_trace(config.out, config, exc.trace)
        raise
    if config.out:
        write_trace(config.out, config, trace)
    return trace


def _dispatch(config: RunConfig, bundle: ProblemBundle, record):
    instance = bundle.instance
    if config.solver == "spbcd":
        step_config = spbcd.StepsizeConfig.for_instance(
            instance, config.K, rule=config.rule,
            sigma_override=config.sigma_override, sigma_scale=config.sigma_scale)
        _, trace = spbcd.run(
            instance, step_config, config.passes,
            metric_callback=lambda p, state, secs: record(p, state.x, state.y, secs),
            seed=config.seed, workers=config.workers)
        return trace
    if config.solver == "pdcp":
        pd_config = baselines.PdcpConfig.recommended(instance)
        _, trace = baselines.pdcp_run(
            instance, pd_config, config.passes,
            metric_callback=lambda p, state, secs: record(p, state.x, state.y, secs))
        return trace
    if config.solver == "preconditioned-pdcp":
        _, trace = baselines.preconditioned_pdcp_run(
            instance, config.passes,
            metric_callback=lambda p, state, secs: record(p, state.x, state.y, secs))
        return trace
    # ista / fista operate on the raw lasso data
    A, b, lam = bundle.lasso_data
    zeros_y = np.zeros(instance.m)
    callback = lambda p, x, secs: record(p, x, zeros_y, secs)  # noqa: E731
    if config.solver == "ista":
        _, trace = baselines.ista_run(A, b, lam, config.passes, metric_callback=callback)
    else:
        _, trace = baselines.fista_run(A, b, lam, passes=config.passes,
                                       metric_callback=callback)
    return trace


# ---------------------------------------------------------------------------
# Trace files
# ---------------------------------------------------------------------------

def write_trace(path, config: RunConfig, trace) -> Path:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with_gap = any(rec.gap is not None for rec in trace)
    lines = [
        f"# seed={config.seed}",
        f"# solver={config.solver}",
        f"# K={config.K}",
        f"# problem={config.problem}",
        f"# rule={config.rule}",
        f"# workers={config.workers}",
    ]
    if config.sigma_override is not None:
        lines.append(f"# sigma_override={config.sigma_override!r}")
    if config.sigma_scale != 1.0:
        lines.append(f"# sigma_scale={config.sigma_scale!r}")
    header = "pass,elapsed_ms,objective,residual"
    if with_gap:
        header += ",gap"
    lines.append(header)
    for rec in trace:
        row = f"{rec.pass_index},{rec.elapsed_ms:.3f},{rec.objective!r},{rec.residual!r}"
        if with_gap:
            row += f",{rec.gap!r}"
        lines.append(row)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def read_trace(path):
    """Read back a trace file as (header dict, list of TraceRecord)."""
    header = {}
    records = []
    columns = None
    for raw in Path(path).read_text(encoding="ascii").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key.strip()] = value.strip()
            continue
        if columns is None:
            columns = line.split(",")
            continue
        parts = line.split(",")
        rec = dict(zip(columns, parts))
        records.append(TraceRecord(
            pass_index=int(rec["pass"]),
            elapsed_ms=float(rec["elapsed_ms"]),
            objective=float(rec["objective"]),
            residual=float(rec["residual"]),
            gap=float(rec["gap"]) if "gap" in rec else None,
        ))
    return header, records


# ---------------------------------------------------------------------------
# Comparisons
# ---------------------------------------------------------------------------

def compare(configs, out_dir, metric: str = "objective") -> dict:
    """Run >= 2 configs on the same generated problem; write a merged
    long-format CSV and two SVG charts (metric vs pass, metric vs time)."""
    configs = list(configs)
    if len(configs) < 2:
        raise ConfigError("compare needs at least two configurations")
    if metric not in ("objective", "residual", "gap"):
        raise ConfigError(f"unknown metric {metric!r}")
    keys = {c.problem_key() for c in configs}
    if len(keys) != 1:
        raise ConfigError(
            "compare requires identical problem data (same problem and seed); "
            f"got {sorted(keys)}"
        )
    labels = [c.series_label() for c in configs]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"series labels must be distinct, got {labels}")

    bundle = build_problem(configs[0])
    traces = [run_experiment(c, bundle=bundle) for c in configs]

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    combined = out_dir / "combined.csv"
    with_gap = any(rec.gap is not None for trace in traces for rec in trace)
    lines = [f"# problem={configs[0].problem}", f"# seed={configs[0].seed}"]
    header = "solver,pass,elapsed_ms,objective,residual"
    if with_gap:
        header += ",gap"
    lines.append(header)
    for label, trace in zip(labels, traces):
        for rec in trace:
            row = (f"{label},{rec.pass_index},{rec.elapsed_ms:.3f},"
                   f"{rec.objective!r},{rec.residual!r}")
            if with_gap:
                row += f",{rec.gap!r}"
            lines.append(row)
    combined.write_text("\n".join(lines) + "\n", encoding="ascii")

    def metric_values(trace):
        return [getattr(rec, "gap" if metric == "gap" else metric) for rec in trace]

    all_vals = [v for trace in traces for v in metric_values(trace) if v is not None]
    logy = bool(all_vals) and all(
        v > 0 and math.isfinite(v) for v in all_vals
    )

    paths = {"combined": combined}
    for suffix, x_of, xlabel in (
        ("pass", lambda rec: rec.pass_index, "passes"),
        ("time", lambda rec: rec.elapsed_ms, "solver time (ms)"),
    ):
        series = [
            Series(label=label,
                   xs=[x_of(rec) for rec in trace],
                   ys=metric_values(trace))
            for label, trace in zip(labels, traces)
        ]
        svg = render_svg(series, AxisSpec(
            title=f"{configs[0].problem}: {metric} vs {xlabel}",
            xlabel=xlabel, ylabel=metric, logy=logy))
        path = out_dir / f"{metric}_vs_{suffix}.svg"
        path.write_text(svg, encoding="ascii")
        paths[suffix] = path
    return paths


# ---------------------------------------------------------------------------
# key = value config files
# ---------------------------------------------------------------------------

_BOOL_FIELDS = {"normalize", "gap"}


def _parse_value(name: str, text: str):
    for f in fields(RunConfig):
        if f.name == name:
            break
    else:
        raise ConfigError(f"unknown config key {name!r}")
    text = text.strip()
    if name in _BOOL_FIELDS:
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{name} expects true/false, got {text!r}")
    if f.type in ("int", "int | None"):
        return int(text)
    if f.type in ("float", "float | None"):
        return float(text)
    return text


def parse_config_file(path) -> dict:
    """A flat ``key = value`` file, optionally under a [run] section header.

    Keys are RunConfig field names (underscores). CLI flags override file
    values.
    """
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("[") and line.endswith("]"):
            if line not in ("[run]",):
                raise ConfigError(f"{path}:{lineno}: unknown section {line}")
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        values[key] = _parse_value(key, value)
    return values


def config_from_sources(file_values: dict | None, flag_values: dict) -> RunConfig:
    """Merge config-file values with CLI flags; flags win on conflict."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
