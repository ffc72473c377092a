"""Block function and dual function descriptors with closed-form prox dispatch.

A block term must expose ``value(x)``, ``prox(v, h)`` and a ``separable``
flag; non-separable terms (group L2, nuclear) only admit a closed-form prox
under a block-uniform metric, so they collapse a vector ``h`` to its maximum.
That uniform penalty dominates the per-dimension adaptive values, which keeps
the stepsize validity matrix positive semidefinite.

A dual term exposes ``value(y)``, ``resolvent(y_prev, u, sigma)`` and the
conjugate pair ``max_inner(u)`` / ``argmax_inner(u)`` used to evaluate the
primal objective from the saddle function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .prox import (
    dual_resolvent_box_linear,
    dual_resolvent_linear,
    dual_resolvent_quadratic,
    prox_group_l2,
    prox_l1,
    prox_nuclear,
    prox_quadratic_frobenius,
)


def _scalar_metric(h) -> float:
    return float(np.max(h))


@dataclass(frozen=True)
class L1Block:
    """f(x) = weight * ||x||_1."""

    weight: float
    separable = True

    def value(self, x) -> float:
        return self.weight * float(np.abs(x).sum())

    def prox(self, v, h) -> np.ndarray:
        return prox_l1(v, self.weight / np.asarray(h, dtype=float))


@dataclass(frozen=True)
class GroupL2Block:
    """f(x) = weight * ||x||_2 (one group)."""

    weight: float
    separable = False

    def value(self, x) -> float:
        return self.weight * float(np.linalg.norm(x))

    def prox(self, v, h) -> np.ndarray:
        return prox_group_l2(v, self.weight / _scalar_metric(h))


@dataclass(frozen=True)
class QuadraticBlock:
    """f(x) = (1/2) ||x||^2."""

    separable = True

    def value(self, x) -> float:
        x = np.asarray(x)
        return 0.5 * float(x @ x)

    def prox(self, v, h) -> np.ndarray:
        return prox_quadratic_frobenius(v, np.asarray(h, dtype=float))


@dataclass(frozen=True)
class ZeroBlock:
    """f(x) = 0."""

    separable = True

    def value(self, x) -> float:
        return 0.0

    def prox(self, v, h) -> np.ndarray:
        return np.asarray(v, dtype=float).copy()


@dataclass(frozen=True)
class NuclearBlock:
    """f(X) = weight * ||X||_* on a vectorized (rows x cols) matrix block."""

    weight: float
    rows: int
    cols: int
    separable = False

    def _mat(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float).reshape(self.rows, self.cols)

    def value(self, x) -> float:
        s = np.linalg.svd(self._mat(x), compute_uv=False)
        return self.weight * float(s.sum())

    def prox(self, v, h) -> np.ndarray:
        tau = self.weight / _scalar_metric(h)
        return prox_nuclear(self._mat(v), tau).ravel()


@dataclass(frozen=True, eq=False)
class LinearDual:
    """g*(y) = <y, b>; the Lagrangian dual of the equality constraint Ax = b."""

    b: np.ndarray

    def value(self, y) -> float:
        return float(self.b @ y)

    def resolvent(self, y_prev, u, sigma) -> np.ndarray:
        return dual_resolvent_linear(y_prev, u, self.b, sigma)

    def max_inner(self, u, tol: float = 1e-8) -> float:
        """sup_y <y,u> - g*(y): zero when u = b, +inf otherwise."""
        gap = float(np.linalg.norm(np.asarray(u) - self.b))
        scale = 1.0 + float(np.linalg.norm(self.b))
        return 0.0 if gap <= tol * scale else np.inf

    def argmax_inner(self, u):
        return None  # unbounded unless u = b; no canonical maximizer


@dataclass(frozen=True, eq=False)
class QuadraticDual:
    """g*(y) = sum(y^2/2 + b*y); the conjugate of the square loss (1/2)||u - b||^2."""

    b: np.ndarray

    def value(self, y) -> float:
        y = np.asarray(y)
        return 0.5 * float(y @ y) + float(self.b @ y)

    def resolvent(self, y_prev, u, sigma) -> np.ndarray:
        return dual_resolvent_quadratic(y_prev, u, self.b, sigma)

    def max_inner(self, u) -> float:
        r = np.asarray(u) - self.b
        return 0.5 * float(r @ r)

    def argmax_inner(self, u) -> np.ndarray:
        return np.asarray(u, dtype=float) - self.b


@dataclass(frozen=True)
class BoxLinearDual:
    """g*(y) = c * sum(y) restricted to y in [0,1]^m.

    c is the signed linear coefficient; the hinge-loss instance uses c = -1/N
    so that sup_y <y,u> - g*(y) = sum(max(0, u - c)) recovers the scaled
    hinge losses.
    """

    c: float

    def value(self, y) -> float:
        return self.c * float(np.sum(y))

    def resolvent(self, y_prev, u, sigma) -> np.ndarray:
        return dual_resolvent_box_linear(y_prev, u, self.c, sigma)

    def max_inner(self, u) -> float:
        return float(np.maximum(np.asarray(u) - self.c, 0.0).sum())

    def argmax_inner(self, u) -> np.ndarray:
        return (np.asarray(u) > self.c).astype(float)
