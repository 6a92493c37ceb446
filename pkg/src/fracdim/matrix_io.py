"""Matrix containers and the two persistent data formats.

Binary format ("FDM1"): 4 ASCII magic bytes, rows as unsigned 64-bit
little-endian, cols likewise, then the row-major IEEE-754 float64
little-endian payload. CSV: one matrix row per line, comma separated,
no header, values rendered with Python's shortest round-tripping repr.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    IoFailure,
    MalformedHeader,
    NonFiniteEntry,
    ValidationError,
)
from .rng import SplitMix64

MAGIC = b"FDM1"
_HEADER = struct.Struct("<4sQQ")


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Row-major float64 matrix. Entries must be finite. The constructor
    takes ownership of the array and marks it read-only."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected 2-d data, got {arr.ndim}-d")
        if not np.all(np.isfinite(arr)):
            r, c = np.argwhere(~np.isfinite(arr))[0]
            raise NonFiniteEntry(f"non-finite entry at row {r}, col {c}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, DenseMatrix)
            and self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data)
        )


@dataclass(frozen=True)
class LossMatrix:
    """Per-sample losses: rows are iterates/hypotheses, columns are data
    samples. Optionally carries a declared loss bound B, in which case
    entries must lie in [0, B]."""

    inner: DenseMatrix
    bound: float | None = None

    def __post_init__(self):
        if self.inner.rows < 2:
            raise ValidationError(
                f"loss matrix needs at least 2 hypothesis rows, got {self.inner.rows}"
            )
        if self.bound is not None:
            lo = float(self.inner.data.min())
            hi = float(self.inner.data.max())
            if lo < 0.0 or hi > self.bound:
                raise ValidationError(
                    f"losses must lie in [0, {self.bound}], found range [{lo}, {hi}]"
                )

    @property
    def n_iterates(self) -> int:
        return self.inner.rows

    @property
    def n_samples(self) -> int:
        return self.inner.cols


def _triu_row_starts(n: int) -> np.ndarray:
    """Packed offset of entry (i, i+1) for each row i of a strict upper
    triangle stored row-major."""
    i = np.arange(n, dtype=np.int64)
    return i * (n - 1) - (i * (i - 1)) // 2


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric nonnegative matrix with zero diagonal, stored as the
    packed strict upper triangle (row-major). Pseudo-metrics are allowed:
    off-diagonal zeros are fine."""

    n_pts: int
    values: np.ndarray
    _starts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        n = self.n_pts
        if n < 1:
            raise ValidationError("distance matrix needs at least 1 point")
        if vals.shape != (n * (n - 1) // 2,):
            raise DimensionMismatch(
                f"packed triangle for {n} points needs {n * (n - 1) // 2} "
                f"values, got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise NonFiniteEntry("non-finite distance value")
        if vals.size and vals.min() < 0.0:
            raise ValidationError("negative distance value")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_starts", _triu_row_starts(n))

    def get(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        if i > j:
            i, j = j, i
        return float(self.values[self._starts[i] + (j - i - 1)])

    def row(self, i: int) -> np.ndarray:
        """Full distance row i as a length-n array."""
        n = self.n_pts
        out = np.empty(n)
        out[i] = 0.0
        if i > 0:
            before = np.arange(i, dtype=np.int64)
            out[:i] = self.values[self._starts[before] + (i - before - 1)]
        if i < n - 1:
            s = self._starts[i]
            out[i + 1 :] = self.values[s : s + (n - i - 1)]
        return out

    def to_dense(self) -> DenseMatrix:
        n = self.n_pts
        full = np.zeros((n, n))
        iu, ju = np.triu_indices(n, k=1)
        full[iu, ju] = self.values
        full[ju, iu] = self.values
        return DenseMatrix(full)

    @staticmethod
    def from_dense(m: DenseMatrix, tol: float = 0.0) -> "DistanceMatrix":
        """Build from a square symmetric matrix; symmetry and a zero
        diagonal are required up to tol."""
        a = m.data
        if a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"square matrix required, got {a.shape}")
        if np.abs(np.diag(a)).max(initial=0.0) > tol:
            raise ValidationError("diagonal must be zero")
        if a.size and np.abs(a - a.T).max() > tol:
            raise ValidationError("matrix is not symmetric")
        iu, ju = np.triu_indices(a.shape[0], k=1)
        return DistanceMatrix(a.shape[0], a[iu, ju])

    def scaled(self, c: float) -> "DistanceMatrix":
        if c <= 0:
            raise ValidationError("scale factor must be positive")
        return DistanceMatrix(self.n_pts, self.values * c)

    def submatrix(self, indices: np.ndarray) -> "DistanceMatrix":
        """Induced sub-distance-matrix on the given sorted point indices."""
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size < 1:
            raise ValidationError("empty index set")
        if np.any(idx < 0) or np.any(idx >= self.n_pts):
            raise ValidationError("point index out of range")
        if np.any(np.diff(idx) <= 0):
            raise ValidationError("indices must be strictly increasing")
        k = idx.size
        ii, jj = np.triu_indices(k, k=1)
        pos = self._starts[idx[ii]] + (idx[jj] - idx[ii] - 1)
        return DistanceMatrix(k, self.values[pos])

    def diameter(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    def check_triangle(
        self, n_triples: int = 10_000, seed: int = 0, ulp_slack: float = 8.0
    ) -> bool:
        """Spot-check d(i,k) <= d(i,j) + d(j,k) on random triples, with a
        relative slack of a few ulp for accumulated rounding."""
        n = self.n_pts
        if n < 3:
            return True
        eps = np.finfo(np.float64).eps
        stream = SplitMix64(seed, 0x7121)
        for _ in range(n_triples):
            i = stream.next_below(n)
            j = stream.next_below(n)
            k = stream.next_below(n)
            if self.get(i, k) > (self.get(i, j) + self.get(j, k)) * (1.0 + ulp_slack * eps):
                return False
        return True


def save_matrix(m: DenseMatrix, path, format: str = "binary") -> None:
    """Write a matrix in the binary or csv format. Degenerate shapes
    (zero rows or columns) are not serializable."""
    if m.rows < 1 or m.cols < 1:
        raise MalformedHeader(f"cannot serialize a {m.rows}x{m.cols} matrix")
    try:
        if format == "binary":
            with open(path, "wb") as fh:
                fh.write(_HEADER.pack(MAGIC, m.rows, m.cols))
                fh.write(m.data.astype("<f8").tobytes())
        elif format == "csv":
            with open(path, "w", encoding="ascii") as fh:
                for r in range(m.rows):
                    fh.write(",".join(repr(v) for v in m.data[r].tolist()))
                    fh.write("\n")
        else:
            raise ValidationError(f"unknown format {format!r}")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_matrix(path, format: str = "binary") -> DenseMatrix:
    """Read a matrix written by save_matrix; all entries must be finite."""
    if format == "binary":
        return _load_binary(path)
    if format == "csv":
        return _load_csv(path)
    raise ValidationError(f"unknown format {format!r}")


def _load_binary(path) -> DenseMatrix:
    try:
        with open(path, "rb") as fh:
            head = fh.read(_HEADER.size)
            if len(head) < _HEADER.size:
                raise MalformedHeader(f"{path}: truncated header ({len(head)} bytes)")
            magic, rows, cols = _HEADER.unpack(head)
            if magic != MAGIC:
                raise MalformedHeader(f"{path}: bad magic {magic!r}")
            if rows < 1 or cols < 1:
                raise MalformedHeader(f"{path}: degenerate shape {rows}x{cols}")
            payload = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    expected = rows * cols * 8
    if len(payload) != expected:
        raise DimensionMismatch(
            f"{path}: payload holds {len(payload)} bytes, header implies {expected}"
        )
    data = np.frombuffer(payload, dtype="<f8").reshape(rows, cols)
    if not np.all(np.isfinite(data)):
        r, c = np.argwhere(~np.isfinite(data))[0]
        raise NonFiniteEntry(f"{path}: non-finite entry at row {r}, col {c}")
    return DenseMatrix(data.astype(np.float64))


def _load_csv(path) -> DenseMatrix:
    rows = []
    width = None
    try:
        with open(path, "r", encoding="ascii") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                cells = line.split(",")
                if width is None:
                    width = len(cells)
                elif len(cells) != width:
                    raise DimensionMismatch(
                        f"{path}: line {lineno} has {len(cells)} cells, expected {width}"
                    )
                row = np.empty(width)
                for c, cell in enumerate(cells):
                    try:
                        v = float(cell)
                    except ValueError as exc:
                        raise MalformedHeader(
                            f"{path}: line {lineno}, cell {c + 1}: cannot parse {cell!r}"
                        ) from exc
                    if not np.isfinite(v):
                        raise NonFiniteEntry(
                            f"{path}: non-finite entry at line {lineno}, cell {c + 1}"
                        )
                    row[c] = v
                rows.append(row)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise MalformedHeader(f"{path}: no data rows")
    return DenseMatrix(np.vstack(rows))


def save_distance_matrix(d: DistanceMatrix, path, format: str = "binary") -> None:
    """Persist as the equivalent dense symmetric matrix."""
    save_matrix(d.to_dense(), path, format)


def load_distance_matrix(path, format: str = "binary", tol: float = 0.0) -> DistanceMatrix:
    return DistanceMatrix.from_dense(load_matrix(path, format), tol=tol)
