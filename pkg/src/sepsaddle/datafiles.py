"""File formats: numeric CSV matrices, libsvm feature files, and the
problem-directory layout written by ``generate`` and read by ``run --problem
file``.

A problem directory holds ``meta.txt`` (sorted ``key = value`` lines) plus
the data matrices as CSV. Floats are serialized with ``repr`` (shortest
round-trip form), so save -> load -> save is byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import FormatError
from .matrices import DenseMatrix
from .problems import GroupSpec


def load_matrix_csv(path) -> DenseMatrix:
    """Comma-separated numeric rows of uniform width."""
    rows = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise FormatError(f"expected {width} columns, found {len(parts)}", line=lineno)
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise FormatError(f"non-numeric entry ({exc})", line=lineno) from None
    if not rows:
        raise FormatError(f"{path}: empty matrix file")
    return DenseMatrix(rows)


def save_matrix_csv(path, matrix) -> None:
    values = matrix.values if isinstance(matrix, DenseMatrix) else np.asarray(matrix, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    with open(path, "w", encoding="ascii") as fh:
        for row in values:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def load_vector_csv(path) -> np.ndarray:
    """Single-column CSV as a 1-d vector."""
    matrix = load_matrix_csv(path)
    if matrix.cols != 1:
        raise FormatError(f"{path}: expected a single column, found {matrix.cols}")
    return matrix.values[:, 0].copy()


def load_libsvm(path, num_features: int | None = None):
    """``label idx:val ...`` lines with 1-based indices; absent entries are
    zero. Returns (features, labels); width is ``num_features`` or the
    largest index seen."""
    labels = []
    entries = []
    max_index = 0
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                labels.append(float(parts[0]))
            except ValueError:
                raise FormatError(f"bad label {parts[0]!r}", line=lineno) from None
            row = {}
            for token in parts[1:]:
                try:
                    idx_text, val_text = token.split(":", 1)
                    idx = int(idx_text)
                    val = float(val_text)
                except ValueError:
                    raise FormatError(f"bad feature token {token!r}", line=lineno) from None
                if idx < 1:
                    raise FormatError(f"indices are 1-based, got {idx}", line=lineno)
                row[idx] = val
                max_index = max(max_index, idx)
            entries.append(row)
    if not entries:
        raise FormatError(f"{path}: empty libsvm file")
    width = num_features if num_features is not None else max_index
    if max_index > width:
        raise FormatError(f"{path}: feature index {max_index} exceeds width {width}")
    data = np.zeros((len(entries), width))
    for i, row in enumerate(entries):
        for idx, val in row.items():
            data[i, idx - 1] = val
    return DenseMatrix(data), np.asarray(labels)


def _format_meta_value(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def write_meta(path, meta: dict) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for key in sorted(meta):
            fh.write(f"{key} = {_format_meta_value(meta[key])}\n")


def read_meta(path) -> dict:
    meta = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FormatError("expected 'key = value'", line=lineno)
            key, _, value = line.partition("=")
            meta[key.strip()] = value.strip()
    return meta


def save_problem_dir(path, kind: str, arrays: dict, meta: dict) -> Path:
    """Write a problem directory: meta.txt plus one CSV per named array."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    write_meta(root / "meta.txt", {**meta, "problem": kind})
    for name, arr in arrays.items():
        save_matrix_csv(root / f"{name}.csv", arr)
    return root


def load_problem_dir(path):
    """Read a problem directory back as (kind, arrays, meta)."""
    root = Path(path)
    meta = read_meta(root / "meta.txt")
    kind = meta.pop("problem", None)
    if kind is None:
        raise FormatError(f"{root}/meta.txt: missing 'problem' key")
    arrays = {}
    for csv_path in sorted(root.glob("*.csv")):
        arrays[csv_path.stem] = load_matrix_csv(csv_path)
    return kind, arrays, meta


def groups_from_meta(meta: dict) -> GroupSpec:
    sizes = [int(s) for s in meta["groups"].split(",")]
    return GroupSpec(sizes)
