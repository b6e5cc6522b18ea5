"""Core value types shared across the package, plus CSV/JSON serialization.

Conventions:

* matrices are C-order ``float64`` numpy arrays;
* a weight-matrix entry ``W[i, j]`` is the influence of variable ``i`` on
  variable ``j``, so column ``j`` collects the parents of ``j``;
* column statistics use the population convention (denominator ``n``).

All types are immutable after construction; the operations here are pure.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .acyclicity import find_cycle, is_dag

__all__ = [
    "DataFormatError",
    "CyclicGraphError",
    "Dataset",
    "WeightedGraph",
    "BinaryDag",
    "center_and_scale",
    "default_names",
    "check_samples",
    "read_csv",
    "write_csv",
    "read_matrix_csv",
    "write_matrix_csv",
]


class DataFormatError(ValueError):
    """Malformed numeric input; carries the offending row/column when known."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        self.row = row
        self.col = col
        where = ""
        if row is not None and col is not None:
            where = f" (row {row}, column {col})"
        elif row is not None:
            where = f" (row {row})"
        elif col is not None:
            where = f" (column {col})"
        super().__init__(message + where)


class CyclicGraphError(ValueError):
    """A graph that had to be acyclic contains a directed cycle."""

    def __init__(self, message: str, cycle: list[int] | None = None):
        self.cycle = cycle
        if cycle:
            message += ": " + " -> ".join(str(v) for v in cycle)
        super().__init__(message)


def default_names(d: int) -> tuple[str, ...]:
    return tuple(f"X{i}" for i in range(d))


def check_samples(X: object, min_rows: int = 2, min_cols: int = 2) -> np.ndarray:
    """Validate a sample matrix: 2-D, float64, finite, at least 2x2."""
    A = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if A.ndim != 2:
        raise DataFormatError(f"expected a 2-D sample matrix, got ndim={A.ndim}")
    n, d = A.shape
    if n < min_rows or d < min_cols:
        raise DataFormatError(f"need at least {min_rows} rows and {min_cols} columns, got {n}x{d}")
    if not np.all(np.isfinite(A)):
        bad = np.argwhere(~np.isfinite(A))[0]
        raise DataFormatError("non-finite entry", row=int(bad[0]), col=int(bad[1]))
    return A


def _population_stats(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return X.mean(axis=0), X.std(axis=0)  # ddof=0


@dataclass(frozen=True)
class Dataset:
    """An n x d sample matrix with column names and recorded column stats."""

    samples: np.ndarray
    names: tuple[str, ...]
    col_means: np.ndarray
    col_stds: np.ndarray

    @classmethod
    def from_samples(
        cls,
        samples: object,
        names: Sequence[str] | None = None,
        allow_constant: bool = False,
    ) -> "Dataset":
        X = check_samples(samples)
        n, d = X.shape
        if names is None:
            names = default_names(d)
        names = tuple(str(s) for s in names)
        if len(names) != d:
            raise DataFormatError(f"got {len(names)} names for {d} columns")
        means, stds = _population_stats(X)
        if not allow_constant and np.any(stds == 0.0):
            j = int(np.flatnonzero(stds == 0.0)[0])
            raise DataFormatError("constant column (zero variance)", col=j)
        X.setflags(write=False)
        return cls(samples=X, names=names, col_means=means, col_stds=stds)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]


def center_and_scale(
    ds: Dataset,
    mode: str,
    factors: Sequence[float] | None = None,
) -> Dataset:
    """Return a new dataset with columns centered / standardized / rescaled.

    Modes:
      ``none``         unchanged;
      ``center``       subtract the column mean;
      ``standardize``  center, then divide by the population std;
      ``rescale``      multiply column j by ``factors[j]`` (no centering).

    Standardizing a zero-variance column raises :class:`DataFormatError`
    naming the column.  Rescale factors must all be positive.
    """
    X = ds.samples
    if mode == "none":
        return ds
    if mode == "center":
        return Dataset.from_samples(X - X.mean(axis=0), ds.names, allow_constant=True)
    if mode == "standardize":
        stds = X.std(axis=0)
        if np.any(stds == 0.0):
            j = int(np.flatnonzero(stds == 0.0)[0])
            raise DataFormatError("cannot standardize a zero-variance column", col=j)
        return Dataset.from_samples((X - X.mean(axis=0)) / stds, ds.names, allow_constant=True)
    if mode == "rescale":
        if factors is None:
            raise ValueError("mode 'rescale' requires factors")
        f = np.asarray(factors, dtype=np.float64)
        if f.shape != (ds.d,):
            raise ValueError(f"need {ds.d} rescale factors, got shape {f.shape}")
        if np.any(f <= 0.0) or not np.all(np.isfinite(f)):
            raise ValueError("rescale factors must be positive and finite")
        return Dataset.from_samples(X * f, ds.names, allow_constant=True)
    raise ValueError(f"unknown mode {mode!r}; expected none|center|standardize|rescale")


@dataclass(frozen=True)
class WeightedGraph:
    """A d x d weight matrix with node labels; entry [i, j] is edge i -> j."""

    weights: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        W = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"weights must be square, got shape {W.shape}")
        if len(self.names) != W.shape[0]:
            raise ValueError(f"got {len(self.names)} names for {W.shape[0]} nodes")
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "names", tuple(str(s) for s in self.names))

    @property
    def d(self) -> int:
        return self.weights.shape[0]

    def support(self, omega: float = 0.0) -> np.ndarray:
        """Boolean adjacency of entries with |weight| > omega."""
        return np.abs(self.weights) > omega

    def to_json_dict(self) -> dict:
        return {"names": list(self.names), "weights": self.weights.tolist()}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "WeightedGraph":
        try:
            names = [str(s) for s in obj["names"]]
            W = np.asarray(obj["weights"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"bad weighted-graph JSON: {exc}") from None
        return cls(weights=W, names=tuple(names))


@dataclass(frozen=True)
class BinaryDag:
    """A verified-acyclic adjacency matrix plus one topological order."""

    adjacency: np.ndarray
    topological_order: tuple[int, ...]

    def __post_init__(self):
        A = np.ascontiguousarray(np.asarray(self.adjacency, dtype=bool))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {A.shape}")
        d = A.shape[0]
        order = tuple(int(v) for v in self.topological_order)
        if sorted(order) != list(range(d)):
            raise ValueError("topological_order must be a permutation of the nodes")
        pos = {v: k for k, v in enumerate(order)}
        for i, j in zip(*np.nonzero(A)):
            if pos[int(i)] >= pos[int(j)]:
                raise CyclicGraphError(
                    f"order inconsistent with edge {int(i)} -> {int(j)}"
                )
        A.setflags(write=False)
        object.__setattr__(self, "adjacency", A)
        object.__setattr__(self, "topological_order", order)

    @classmethod
    def from_adjacency(cls, adjacency: np.ndarray) -> "BinaryDag":
        """Build from a boolean matrix, raising CyclicGraphError with a witness."""
        acyclic, order = is_dag(adjacency)
        if not acyclic:
            raise CyclicGraphError("graph is cyclic", cycle=find_cycle(adjacency))
        return cls(adjacency=np.asarray(adjacency) != 0, topological_order=tuple(order))

    @property
    def d(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum())

    def edges(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.adjacency))]


# ---------------------------------------------------------------------------
# CSV / JSON round-tripping.  Floats are written with repr(), which is the
# shortest exactly round-tripping decimal form, so write -> read is value
# exact for anything this library produced itself.

def _fmt(v: float) -> str:
    return repr(float(v))


def _parse_cell(cell: str, row: int, col: int) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise DataFormatError(f"non-numeric cell {cell!r}", row=row, col=col) from None
    if not np.isfinite(v):
        raise DataFormatError(f"non-finite cell {cell!r}", row=row, col=col)
    return v


def read_csv(path: str | Path) -> Dataset:
    """Read a rectangular numeric CSV (optional header row) as a Dataset.

    Error rows are 1-based file line numbers; columns are 0-based indices.
    Constant (zero-variance) columns are rejected.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh)]
    rows = [r for r in rows if r]  # drop blank lines (trailing newline etc.)
    if not rows:
        raise DataFormatError("empty CSV file")

    header: list[str] | None = None
    first = rows[0]

    def _is_numeric(cell: str) -> bool:
        try:
            float(cell)
            return True
        except ValueError:
            return False

    if not all(_is_numeric(c) for c in first):
        header = [c.strip() for c in first]
        rows = rows[1:]
        if not rows:
            raise DataFormatError("CSV has a header but no data rows")

    width = len(rows[0]) if header is None else len(header)
    data = np.empty((len(rows), width), dtype=np.float64)
    offset = 2 if header is not None else 1
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(
                f"ragged row: expected {width} cells, got {len(row)}", row=r + offset
            )
        for c, cell in enumerate(row):
            data[r, c] = _parse_cell(cell.strip(), row=r + offset, col=c)

    if data.shape[0] < 2 or data.shape[1] < 2:
        raise DataFormatError(f"need at least 2 rows and 2 columns, got {data.shape[0]}x{data.shape[1]}")
    return Dataset.from_samples(data, header)


def write_csv(ds: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ds.names)
        for row in ds.samples:
            writer.writerow([_fmt(v) for v in row])


def read_matrix_csv(path: str | Path) -> np.ndarray:
    """Read a headerless numeric CSV as a float64 matrix."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise DataFormatError("empty CSV file")
    width = len(rows[0])
    M = np.empty((len(rows), width), dtype=np.float64)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(f"ragged row: expected {width} cells, got {len(row)}", row=r + 1)
        for c, cell in enumerate(row):
            M[r, c] = _parse_cell(cell.strip(), row=r + 1, col=c)
    return M


def write_matrix_csv(M: np.ndarray, path: str | Path) -> None:
    M = np.asarray(M, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in np.atleast_2d(M):
            writer.writerow([_fmt(v) for v in row])


def dump_json(obj: object, path: str | Path) -> None:
    """Write canonical JSON: sorted keys, 2-space indent, trailing newline."""
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
