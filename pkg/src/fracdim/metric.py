"""Distance-matrix construction.

Two families: the data-dependent loss pseudo-metric (mean absolute
per-sample loss difference between two hypotheses, optionally restricted
to a column subset) and the Euclidean metric on raw iterate coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import euclidean_pairs, pseudo_metric_pairs
from .errors import EmptySubset, IndexOutOfRange, ValidationError
from .matrix_io import DenseMatrix, DistanceMatrix, LossMatrix
from .rng import SplitMix64

KIND_LOSS = "loss_pseudo"
KIND_LOSS_SUB = "loss_pseudo_subsampled"
KIND_EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class MetricSpec:
    """Which metric to build and, for the subsampled variant, which
    sample columns enter the mean: an explicit sorted subset or a seeded
    random draw of ceil(fraction * n) columns."""

    kind: str = KIND_LOSS
    subset: tuple[int, ...] | None = None
    fraction: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in (KIND_LOSS, KIND_LOSS_SUB, KIND_EUCLIDEAN):
            raise ValidationError(f"unknown metric kind {self.kind!r}")
        if self.subset is not None and self.fraction is not None:
            raise ValidationError("subset and fraction are mutually exclusive")
        if self.subset is not None:
            if len(self.subset) == 0:
                raise EmptySubset("explicit subset is empty")
            if any(b <= a for a, b in zip(self.subset, self.subset[1:])):
                raise ValidationError("subset indices must be strictly increasing")
            if self.subset[0] < 0:
                raise IndexOutOfRange("negative column index")
        if self.fraction is not None and not 0.0 < self.fraction <= 1.0:
            raise ValidationError(f"fraction must lie in (0, 1], got {self.fraction}")
        if self.kind == KIND_LOSS_SUB and self.subset is None and self.fraction is None:
            raise ValidationError("subsampled metric needs a subset or a fraction")
        if self.kind == KIND_LOSS_SUB and self.fraction is not None and self.seed is None:
            raise ValidationError("random column draw needs a seed")


def subset_size(fraction: float, n: int) -> int:
    """ceil(fraction * n), guarded against binary misrepresentation of
    decimal fractions (0.4 * 2000 must give 800, not 801)."""
    t = fraction * n
    nearest = round(t)
    if abs(t - nearest) < 1e-9 * max(n, 1) and nearest >= 1:
        return int(nearest)
    return int(math.ceil(t))


def draw_columns(n_cols: int, fraction: float, seed: int) -> np.ndarray:
    """Seeded uniform draw without replacement of ceil(fraction*n) column
    indices, sorted ascending."""
    k = subset_size(fraction, n_cols)
    return SplitMix64(seed, 0xC015).sample_sorted(n_cols, k)


def _resolve_columns(L: LossMatrix, spec: MetricSpec) -> np.ndarray:
    if spec.kind == KIND_LOSS:
        return np.arange(L.n_samples, dtype=np.int64)
    if spec.subset is not None:
        cols = np.asarray(spec.subset, dtype=np.int64)
        if cols[-1] >= L.n_samples:
            raise IndexOutOfRange(
                f"column {cols[-1]} out of range for {L.n_samples} samples"
            )
        return cols
    return draw_columns(L.n_samples, spec.fraction, spec.seed)


def pseudo_distance(L: LossMatrix, i: int, j: int, cols=None) -> float:
    """Mean absolute loss difference between hypothesis rows i and j over
    the selected sample columns (all columns when absent)."""
    m = L.inner.data
    for ix in (i, j):
        if not 0 <= ix < L.n_iterates:
            raise IndexOutOfRange(f"row {ix} out of range for {L.n_iterates} iterates")
    if cols is None:
        cols_arr = np.arange(L.n_samples, dtype=np.int64)
    else:
        cols_arr = np.asarray(list(cols), dtype=np.int64)
        if cols_arr.size == 0:
            raise EmptySubset("column subset is empty")
        if cols_arr.min() < 0 or cols_arr.max() >= L.n_samples:
            raise IndexOutOfRange("column subset out of range")
    out = np.empty(1)
    pseudo_metric_pairs(
        m, cols_arr, np.array([i], dtype=np.int64), np.array([j], dtype=np.int64), out
    )
    return float(out[0])


def distance_matrix_from_losses(L: LossMatrix, spec: MetricSpec) -> DistanceMatrix:
    """Pairwise loss pseudo-metric over all hypothesis rows."""
    if spec.kind == KIND_EUCLIDEAN:
        raise ValidationError("euclidean spec passed to a loss-metric builder")
    cols = _resolve_columns(L, spec)
    n = L.n_iterates
    iu, ju = np.triu_indices(n, k=1)
    out = np.empty(iu.size)
    pseudo_metric_pairs(L.inner.data, cols, iu.astype(np.int64), ju.astype(np.int64), out)
    return DistanceMatrix(n, out)


def distance_matrix_euclidean(P: DenseMatrix) -> DistanceMatrix:
    """Pairwise l2 distances between the rows of a point matrix."""
    if P.rows < 2:
        raise ValidationError(f"need at least 2 points, got {P.rows}")
    iu, ju = np.triu_indices(P.rows, k=1)
    out = np.empty(iu.size)
    euclidean_pairs(P.data, iu.astype(np.int64), ju.astype(np.int64), out)
    return DistanceMatrix(P.rows, out)


def build_distance_matrix(
    data: LossMatrix | DenseMatrix, spec: MetricSpec
) -> DistanceMatrix:
    """Dispatch on spec.kind; loss variants need a LossMatrix, euclidean a
    point matrix."""
    if spec.kind == KIND_EUCLIDEAN:
        points = data.inner if isinstance(data, LossMatrix) else data
        return distance_matrix_euclidean(points)
    if not isinstance(data, LossMatrix):
        data = LossMatrix(data)
    return distance_matrix_from_losses(data, spec)
