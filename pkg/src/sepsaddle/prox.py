"""Closed-form proximal operators and dual resolvents under diagonal metrics.

Every function here solves its subproblem exactly:

    prox:      argmin_x  f(x) + (1/2) ||x - v||^2_diag(h)
    resolvent: argmin_y  g*(y) - <y, u> + (1/2) ||y - y_prev||^2_diag(sigma)

Thresholds/penalties may be scalars or per-coordinate vectors wherever the
subproblem stays coordinatewise separable.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericsError


def prox_l1(v, thresholds) -> np.ndarray:
    """Coordinatewise soft threshold: sign(v) * max(|v| - thresholds, 0).

    With thresholds = lam/h this is the exact minimizer of
    lam*|x| + (h/2)(x - v)^2.
    """
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - thresholds, 0.0)


def prox_group_l2(v, tau: float) -> np.ndarray:
    """Block shrinkage (1 - tau/||v||)_+ * v; exact minimizer of
    tau*||x|| + (1/2)||x - v||^2. Returns zero when ||v|| <= tau."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm <= tau:
        return np.zeros_like(v)
    return (1.0 - tau / norm) * v


def prox_nuclear(V, tau: float) -> np.ndarray:
    """Singular value thresholding: U max(S - tau, 0) W^T for V = U S W^T."""
    M = V.values if hasattr(V, "values") else np.asarray(V, dtype=float)
    try:
        U, s, Wt = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(
            f"SVD failed on a {M.shape[0]}x{M.shape[1]} matrix "
            f"(fro norm {np.linalg.norm(M):.3e}, max |entry| {np.abs(M).max():.3e})"
        ) from exc
    return (U * np.maximum(s - tau, 0.0)) @ Wt


def prox_quadratic_frobenius(v, h) -> np.ndarray:
    """Minimizer of (1/2)||x||^2 + (h/2)||x - v||^2, i.e. v*h/(1+h)."""
    v = np.asarray(v, dtype=float)
    return v * (h / (1.0 + h))


def dual_resolvent_linear(y_prev, u, b, sigma) -> np.ndarray:
    """Resolvent for g*(y) = <y, b>: y_prev + (u - b)/sigma."""
    y_prev = np.asarray(y_prev, dtype=float)
    return y_prev + (np.asarray(u, dtype=float) - b) / sigma


def dual_resolvent_quadratic(y_prev, u, b, sigma) -> np.ndarray:
    """Resolvent for g*(y) = sum(y^2/2 + b*y): (sigma*y_prev + u - b)/(sigma + 1).

    sigma = 0 is allowed (the quadratic term keeps the subproblem strongly
    convex) and yields the unpenalized minimizer u - b.
    """
    y_prev = np.asarray(y_prev, dtype=float)
    return (sigma * y_prev + np.asarray(u, dtype=float) - b) / (np.asarray(sigma) + 1.0)


def dual_resolvent_box_linear(y_prev, u, c, sigma) -> np.ndarray:
    """Resolvent for g*(y) = c*sum(y) + indicator([0,1]^m):
    clip(y_prev + (u - c)/sigma, 0, 1)."""
    y_prev = np.asarray(y_prev, dtype=float)
    return np.clip(y_prev + (np.asarray(u, dtype=float) - c) / sigma, 0.0, 1.0)
