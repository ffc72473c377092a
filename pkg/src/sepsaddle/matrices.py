"""Dense coupling matrices, column-block partitions, and the absolute-sum /
norm quantities the stepsize rules consume.

Storage is row-major (C order) float64 throughout; column-block slices are
numpy views, never copies. Matrices are immutable after construction and safe
to share across worker threads.
"""

from __future__ import annotations

from functools import cached_property
from typing import NamedTuple

import numpy as np


class DenseMatrix:
    """Immutable dense m x n matrix with finite entries.

    The backing array is frozen (``writeable=False``) so derived quantities
    can be cached safely.
    """

    def __init__(self, data):
        arr = np.array(data, dtype=float, order="C")
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"matrix must have at least one row and column, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        arr.setflags(write=False)
        self._data = arr

    @property
    def values(self) -> np.ndarray:
        return self._data

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    def __repr__(self):
        return f"DenseMatrix({self.rows}x{self.cols})"


class BlockPartition:
    """Column blocks of widths n_1..n_J; ``offsets`` are the prefix sums."""

    def __init__(self, block_sizes):
        sizes = tuple(int(s) for s in block_sizes)
        if not sizes:
            raise ValueError("partition needs at least one block")
        if any(s < 1 for s in sizes):
            raise ValueError(f"every block size must be >= 1, got {sizes}")
        self.block_sizes = sizes
        self.offsets = tuple(np.concatenate(([0], np.cumsum(sizes))).tolist())

    @classmethod
    def singletons(cls, n: int) -> "BlockPartition":
        """n single-coordinate blocks."""
        return cls([1] * n)

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    @property
    def total(self) -> int:
        return self.offsets[-1]

    def slice_of(self, j: int) -> slice:
        if not 0 <= j < self.num_blocks:
            raise ValueError(f"block index {j} out of range [0, {self.num_blocks})")
        return slice(self.offsets[j], self.offsets[j + 1])

    def __repr__(self):
        return f"BlockPartition({list(self.block_sizes)})"


def _values(A) -> np.ndarray:
    return A.values if isinstance(A, DenseMatrix) else np.asarray(A, dtype=float)


def col_abs_sums(A) -> np.ndarray:
    """Per-column sums of absolute entries.

    This is the coupling strength between each primal coordinate and the dual
    vector, and the adaptive primal proximal penalty.
    """
    return np.abs(_values(A)).sum(axis=0)


def row_abs_sums_over_blocks(A, partition: BlockPartition, blocks) -> np.ndarray:
    """Per-row absolute sums restricted to the selected column blocks."""
    M = _values(A)
    idx = sorted({int(j) for j in blocks})
    if not idx:
        raise ValueError("block selection must be nonempty")
    out = np.zeros(M.shape[0])
    for j in idx:
        out += np.abs(M[:, partition.slice_of(j)]).sum(axis=1)
    return out


def block_matvec(A, partition: BlockPartition, j: int, v) -> np.ndarray:
    """A_j @ v for column block j."""
    M = _values(A)
    sl = partition.slice_of(j)
    v = np.asarray(v, dtype=float)
    width = sl.stop - sl.start
    if v.shape != (width,):
        raise ValueError(f"block {j} expects a length-{width} vector, got shape {v.shape}")
    return M[:, sl] @ v


class SpectralEstimate(NamedTuple):
    value: float
    converged: bool
    iterations: int


# Deterministic start vector for the power iteration: a fixed non-uniform
# pattern so it is never orthogonal to the top singular subspace of the
# matrices we care about; a second fixed pattern is tried if the first one
# lands in the null space.
def _power_start(n: int, variant: int = 0) -> np.ndarray:
    if variant == 0:
        v = 1.0 + (np.arange(n) % 13) / 13.0
    else:
        v = 1.0 + np.sin(np.arange(n) + 1.0)
    return v / np.linalg.norm(v)


def spectral_norm_estimate(A, tol: float = 1e-6, max_iters: int = 1000) -> SpectralEstimate:
    """Largest singular value via power iteration on A^T A.

    Deterministic given the fixed start vector. Stops once successive
    estimates agree to relative ``tol``; if that never happens the best
    estimate is returned with ``converged=False``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = _values(A)
    if not np.any(M):
        return SpectralEstimate(0.0, True, 0)
    v = _power_start(M.shape[1])
    sigma_prev = 0.0
    for it in range(1, max_iters + 1):
        w = M @ v
        sigma = float(np.linalg.norm(w))
        if sigma == 0.0:
            v = _power_start(M.shape[1], variant=1)
            continue
        if abs(sigma - sigma_prev) <= 0.25 * tol * sigma:
            return SpectralEstimate(sigma, True, it)
        sigma_prev = sigma
        z = M.T @ w
        v = z / np.linalg.norm(z)
    return SpectralEstimate(sigma_prev, False, max_iters)


class DenseCoupling:
    """Column-block view of a dense coupling matrix.

    Caches the derived stepsize quantities (column sums, block norms, the
    spectral norm) so they are computed once per instance. Immutable.
    """

    def __init__(self, matrix: DenseMatrix, partition: BlockPartition):
        if not isinstance(matrix, DenseMatrix):
            matrix = DenseMatrix(matrix)
        if partition.total != matrix.cols:
            raise ValueError(
                f"partition covers {partition.total} columns, matrix has {matrix.cols}"
            )
        self.matrix = matrix
        self.partition = partition

    @property
    def m(self) -> int:
        return self.matrix.rows

    @property
    def n(self) -> int:
        return self.matrix.cols

    @property
    def num_blocks(self) -> int:
        return self.partition.num_blocks

    def block_slice(self, j: int) -> slice:
        return self.partition.slice_of(j)

    def block(self, j: int) -> np.ndarray:
        return self.matrix.values[:, self.partition.slice_of(j)]

    def block_matvec(self, j: int, v) -> np.ndarray:
        return block_matvec(self.matrix, self.partition, j, v)

    def block_rmatvec(self, j: int, y) -> np.ndarray:
        return self.block(j).T @ y

    def matvec(self, x) -> np.ndarray:
        return self.matrix.values @ x

    def rmatvec(self, y) -> np.ndarray:
        return self.matrix.values.T @ y

    @cached_property
    def col_abs_sums(self) -> np.ndarray:
        out = col_abs_sums(self.matrix)
        out.setflags(write=False)
        return out

    @cached_property
    def _block_row_abs_sums(self) -> np.ndarray:
        # (J, m): row absolute sums within each block, cached because the
        # dual stepsize rule sums a subset of these every iteration
        out = np.stack([
            np.abs(self.block(j)).sum(axis=1) for j in range(self.num_blocks)
        ])
        out.setflags(write=False)
        return out

    def row_abs_sums(self, blocks) -> np.ndarray:
        idx = sorted({int(j) for j in blocks})
        if not idx:
            raise ValueError("block selection must be nonempty")
        if idx[0] < 0 or idx[-1] >= self.num_blocks:
            raise ValueError(f"block indices {idx} out of range [0, {self.num_blocks})")
        return self._block_row_abs_sums[idx].sum(axis=0)

    @cached_property
    def block_norms(self) -> tuple[float, ...]:
        return tuple(
            spectral_norm_estimate(self.block(j), tol=1e-10, max_iters=5000).value
            for j in range(self.num_blocks)
        )

    @cached_property
    def spectral_norm(self) -> float:
        return spectral_norm_estimate(self.matrix, tol=1e-8, max_iters=5000).value

    def __repr__(self):
        return f"DenseCoupling({self.m}x{self.n}, J={self.num_blocks})"
