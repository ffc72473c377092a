"""Stochastic parallel block-coordinate primal-dual engine.

One iteration: sample K of the J blocks, solve each selected block's prox
subproblem against the current dual (parallelizable, disjoint slices),
extrapolate the selected blocks, then take one dual resolvent step at the
variance-reduced linearization point

    u = r_bar + (J/K) * sum_{j in S} A_j (x_bar_j^new - x_bar_j^old),

and finally refresh the running sum r_bar = sum_j A_j x_bar_j.

Determinism contract: block sampling happens on the run loop thread, block
results land in disjoint slices, and all reductions over selected blocks are
performed in ascending block order, so traces are bit-identical for any
worker count.
"""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericsError, RunAborted

FLOOR_EPS = 1e-10

STEPSIZE_RULES = ("adaptive-l1", "block-spectral")


@dataclass
class SolverState:
    """Iterates of the block engine; r_bar caches sum_j A_j x_bar_j."""

    x: np.ndarray
    x_bar: np.ndarray
    y: np.ndarray
    r_bar: np.ndarray
    t: int = 0

    def validate(self):
        for name in ("x", "x_bar", "y", "r_bar"):
            v = getattr(self, name)
            if not np.all(np.isfinite(v)):
                raise NumericsError(f"non-finite values in {name} at iteration {self.t}")


def initial_state(instance, x0=None, y0=None) -> SolverState:
    x = np.zeros(instance.n) if x0 is None else np.array(x0, dtype=float)
    y = np.zeros(instance.m) if y0 is None else np.array(y0, dtype=float)
    if x.shape != (instance.n,):
        raise ValueError(f"x0 must have shape ({instance.n},)")
    if y.shape != (instance.m,):
        raise ValueError(f"y0 must have shape ({instance.m},)")
    x_bar = x.copy()
    r_bar = np.zeros(instance.m)
    for j in range(instance.num_blocks):
        r_bar += instance.coupling.block_matvec(j, x_bar[instance.block_slice(j)])
    state = SolverState(x=x, x_bar=x_bar, y=y, r_bar=r_bar)
    state.validate()
    return state


@dataclass(eq=False)
class StepsizeConfig:
    """Primal penalties h, extrapolation theta = K/J, and the dual rule.

    ``sigma_override`` replaces the rule's sigma^t with a constant;
    ``sigma_scale`` multiplies it (K/J reproduces the benchmark parameter
    tables). Non-separable blocks get a block-uniform h (the block maximum),
    which dominates the per-dimension values and preserves validity.
    """

    rule: str
    h: np.ndarray
    theta: float
    floor_eps: float
    K: int
    J: int
    sigma_override: float | None = None
    sigma_scale: float = 1.0
    block_norms: tuple | None = None

    @classmethod
    def for_instance(cls, instance, K: int, rule: str = "adaptive-l1",
                     floor_eps: float = FLOOR_EPS, sigma_override=None,
                     sigma_scale: float = 1.0) -> "StepsizeConfig":
        J = instance.num_blocks
        if not 1 <= K <= J:
            raise ConfigError(f"need 1 <= K <= J={J}, got K={K}")
        if rule not in STEPSIZE_RULES:
            raise ConfigError(f"unknown stepsize rule {rule!r}; expected one of {STEPSIZE_RULES}")
        if floor_eps <= 0:
            raise ConfigError("floor_eps must be positive")
        if sigma_override is not None and sigma_override <= 0:
            raise ConfigError("sigma_override must be positive")
        if sigma_scale <= 0:
            raise ConfigError("sigma_scale must be positive")

        block_norms = None
        if rule == "adaptive-l1":
            h = np.array(instance.coupling.col_abs_sums, dtype=float)
        else:
            block_norms = tuple(instance.coupling.block_norms)
            h = np.empty(instance.n)
            for j, nrm in enumerate(block_norms):
                h[instance.block_slice(j)] = nrm

        floored = np.flatnonzero(h < floor_eps)
        if floored.size:
            shown = ", ".join(map(str, floored[:10]))
            more = "" if floored.size <= 10 else f" (+{floored.size - 10} more)"
            warnings.warn(
                f"primal penalty floored at {floor_eps:g} for coordinates [{shown}]{more}",
                RuntimeWarning,
                stacklevel=2,
            )
            h = np.maximum(h, floor_eps)

        # non-separable blocks take the block maximum as a uniform penalty
        for j, fn in enumerate(instance.block_fns):
            if not getattr(fn, "separable", True):
                sl = instance.block_slice(j)
                h[sl] = h[sl].max()

        return cls(rule=rule, h=h, theta=K / J, floor_eps=floor_eps, K=K, J=J,
                   sigma_override=sigma_override, sigma_scale=sigma_scale,
                   block_norms=block_norms)


def sample_blocks(rng: np.random.Generator, J: int, K: int) -> np.ndarray:
    """A uniformly random size-K subset of {0..J-1}, sorted ascending."""
    if not 1 <= K <= J:
        raise ValueError(f"need 1 <= K <= J={J}, got K={K}")
    return np.sort(rng.choice(J, size=K, replace=False))


def compute_sigma_t(coupling, blocks, K: int, J: int, rule: str = "adaptive-l1",
                    floor_eps: float = FLOOR_EPS, block_norms=None) -> np.ndarray:
    """Per-iteration dual penalties for the selected blocks.

    adaptive-l1:     sigma_k = (J/K) sum_{j in S} sum_{d in block j} |A_kd|
    block-spectral:  sigma_k = (J/K) sum_{j in S} ||A_j||  (constant over k)
    """
    if rule == "adaptive-l1":
        sigma = (J / K) * coupling.row_abs_sums(blocks)
    elif rule == "block-spectral":
        norms = block_norms if block_norms is not None else coupling.block_norms
        sigma = np.full(coupling.m, (J / K) * sum(norms[j] for j in blocks))
    else:
        raise ConfigError(f"unknown stepsize rule {rule!r}")
    return np.maximum(sigma, floor_eps)


def _sigma_for(instance, blocks, config: StepsizeConfig) -> np.ndarray:
    if config.sigma_override is not None:
        return np.full(instance.m, max(config.sigma_override, config.floor_eps))
    sigma = compute_sigma_t(instance.coupling, blocks, config.K, config.J,
                            config.rule, config.floor_eps, config.block_norms)
    if config.sigma_scale != 1.0:
        sigma = np.maximum(sigma * config.sigma_scale, config.floor_eps)
    return sigma


def primal_block_step(instance, state: SolverState, j: int, h_j) -> np.ndarray:
    """Exact minimizer of f_j(x_j) + <y, A_j x_j> + (1/2)||x_j - x_j^t||^2_h_j."""
    sl = instance.block_slice(j)
    v = state.x[sl] - instance.coupling.block_rmatvec(j, state.y) / h_j
    return instance.block_fns[j].prox(v, h_j)


def extrapolate(x_new, x_old, theta: float) -> np.ndarray:
    return x_new + theta * (x_new - x_old)


def dual_step(instance, state: SolverState, blocks, sigma_t, delta_bar) -> np.ndarray:
    """One dual resolvent step at u = r_bar + (J/K) * delta_bar, where r_bar
    is the pre-update cache."""
    amplify = instance.num_blocks / len(blocks)
    u = state.r_bar + amplify * delta_bar
    return instance.dual_fn.resolvent(state.y, u, sigma_t)


def _ordered_sum(deltas: dict) -> np.ndarray:
    keys = sorted(deltas)
    total = deltas[keys[0]].copy()
    for j in keys[1:]:
        total += deltas[j]
    return total


def update_rbar(state: SolverState, deltas: dict) -> np.ndarray:
    """r_bar += sum of the per-block deltas, accumulated in ascending block
    order for bit-reproducibility."""
    if deltas:
        state.r_bar = state.r_bar + _ordered_sum(deltas)
    return state.r_bar


def iterate(instance, state: SolverState, config: StepsizeConfig,
            rng: np.random.Generator, executor=None) -> SolverState:
    """One full iteration (Algorithm box): sample, primal steps + extrapolate,
    adaptive dual step, cache refresh."""
    state.validate()
    blocks = sample_blocks(rng, config.J, config.K)

    def block_task(j):
        sl = instance.block_slice(j)
        h_j = config.h[sl]
        x_new = primal_block_step(instance, state, j, h_j)
        xb_new = extrapolate(x_new, state.x[sl], config.theta)
        delta = instance.coupling.block_matvec(j, xb_new - state.x_bar[sl])
        return j, x_new, xb_new, delta

    if executor is None:
        results = [block_task(j) for j in blocks]
    else:
        results = list(executor.map(block_task, blocks))

    delta_bar = _ordered_sum({j: delta for j, _, _, delta in results})
    sigma_t = _sigma_for(instance, blocks, config)
    y_new = dual_step(instance, state, blocks, sigma_t, delta_bar)

    for j, x_new, xb_new, _ in results:
        sl = instance.block_slice(j)
        state.x[sl] = x_new
        state.x_bar[sl] = xb_new
    state.y = y_new
    state.r_bar = state.r_bar + delta_bar
    state.t += 1
    return state


def rbar_drift(instance, state: SolverState) -> float:
    """Relative deviation of the r_bar cache from a fresh block-order sum."""
    fresh = np.zeros(instance.m)
    for j in range(instance.num_blocks):
        fresh += instance.coupling.block_matvec(j, state.x_bar[instance.block_slice(j)])
    return float(np.linalg.norm(state.r_bar - fresh) / (1.0 + np.linalg.norm(state.r_bar)))


def iterations_per_pass(J: int, K: int) -> int:
    """One pass touches ~J blocks: ceil(J/K) iterations."""
    return math.ceil(J / K)


def run(instance, config: StepsizeConfig, pass_budget: int, metric_callback=None, *,
        seed: int = 0, workers: int = 1, x0=None, y0=None,
        rbar_check_interval: int = 2000, rbar_tol: float = 1e-10):
    """Run ``pass_budget`` passes; returns (final state, trace).

    ``metric_callback(pass_index, state, solver_seconds)`` is invoked once per
    pass with the cumulative solver-only wall time (callback time excluded);
    its return values form the trace. Callback or numeric failures raise
    ``RunAborted`` carrying the partial trace. The PCG64 generator seeded
    here is the only randomness in the run.
    """
    if not isinstance(pass_budget, int) or pass_budget < 1:
        raise ValueError(f"pass_budget must be a positive integer, got {pass_budget!r}")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    state = initial_state(instance, x0=x0, y0=y0)
    rng = np.random.Generator(np.random.PCG64(seed))
    per_pass = iterations_per_pass(config.J, config.K)
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    trace = []
    solver_seconds = 0.0
    try:
        for pass_index in range(1, pass_budget + 1):
            tic = time.perf_counter()
            try:
                for _ in range(per_pass):
                    iterate(instance, state, config, rng, executor)
                    if state.t % rbar_check_interval == 0:
                        drift = rbar_drift(instance, state)
                        if drift > rbar_tol:
                            raise NumericsError(
                                f"r_bar cache drift {drift:.3e} exceeds {rbar_tol:g} "
                                f"at iteration {state.t}"
                            )
            except NumericsError as exc:
                raise RunAborted(str(exc), trace) from exc
            solver_seconds += time.perf_counter() - tic
            if metric_callback is not None:
                try:
                    trace.append(metric_callback(pass_index, state, solver_seconds))
                except Exception as exc:
                    raise RunAborted(
                        f"metric callback failed at pass {pass_index}: {exc}", trace
                    ) from exc
    finally:
        if executor is not None:
            executor.shutdown(wait=True)
    return state, trace
