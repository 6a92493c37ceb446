"""Degree-0 persistent homology of a finite (pseudo-)metric space.

Component deaths in the Vietoris-Rips filtration at degree 0 are exactly
the edge weights of a minimum spanning tree of the complete distance
graph, and that weight multiset is unique even under ties. Both MST
algorithms below therefore return the same diagram; Prim is the default
because it runs in O(n^2) without materializing the edge list, Kruskal
(stable ascending sort, ties broken by lexicographic edge index, then
union-find) is kept as an independent route and for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import kruskal_accept, mst_deaths_prim
from .errors import NegativeAlpha, TooFewPoints, ValidationError
from .matrix_io import DistanceMatrix, _triu_row_starts


@dataclass(frozen=True, eq=False)
class PersistenceDiagram0:
    """Multiset of component deaths, sorted ascending. Births are all
    zero and are not stored; a diagram for n points has n-1 deaths."""

    deaths: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.deaths, dtype=np.float64)
        if arr.ndim != 1:
            raise ValidationError("deaths must be a 1-d array")
        if arr.size and (arr.min() < 0.0 or np.any(np.diff(arr) < 0.0)):
            raise ValidationError("deaths must be nonnegative and nondecreasing")
        arr.setflags(write=False)
        object.__setattr__(self, "deaths", arr)

    @property
    def n_pts(self) -> int:
        return self.deaths.size + 1

    def total_persistence(self) -> float:
        return float(self.deaths.sum())


def persistence0(D: DistanceMatrix, algorithm: str = "prim") -> PersistenceDiagram0:
    """Degree-0 persistence diagram of the distance matrix."""
    if D.n_pts < 2:
        raise TooFewPoints(f"persistence needs at least 2 points, got {D.n_pts}")
    if algorithm == "prim":
        subset = np.arange(D.n_pts, dtype=np.int64)
        deaths = mst_deaths_prim(D.values, D.n_pts, subset)
        deaths.sort()
    elif algorithm == "kruskal":
        deaths = _kruskal_deaths(D)
    else:
        raise ValidationError(f"unknown MST algorithm {algorithm!r}")
    return PersistenceDiagram0(deaths)


def _kruskal_deaths(D: DistanceMatrix) -> np.ndarray:
    n = D.n_pts
    # packed order is already lexicographic in (i, j); a stable sort on
    # weight therefore breaks ties exactly by edge index
    order = np.argsort(D.values, kind="stable")
    starts = _triu_row_starts(n)
    i_of = np.searchsorted(starts, order, side="right") - 1
    j_of = order - starts[i_of] + i_of + 1
    return kruskal_accept(
        i_of.astype(np.int64), j_of.astype(np.int64), D.values[order], n
    )


def subset_persistence0(D: DistanceMatrix, indices: np.ndarray) -> PersistenceDiagram0:
    """Diagram of the sub-cloud on the given sorted point indices, without
    materializing the induced submatrix."""
    idx = np.ascontiguousarray(indices, dtype=np.int64)
    if idx.size < 2:
        raise TooFewPoints(f"persistence needs at least 2 points, got {idx.size}")
    deaths = mst_deaths_prim(D.values, D.n_pts, idx)
    deaths.sort()
    return PersistenceDiagram0(deaths)


def weighted_life_sum(pd: PersistenceDiagram0, alpha: float) -> float:
    """Sum of death^alpha over the diagram, with 0^0 = 1 so that the
    alpha=0 sum counts the deaths."""
    if alpha < 0:
        raise NegativeAlpha(f"alpha must be nonnegative, got {alpha}")
    if alpha == 0.0:
        return float(pd.deaths.size)
    if alpha == 1.0:
        return float(pd.deaths.sum())
    return float(np.power(pd.deaths, alpha).sum())


def save_diagram(pd: PersistenceDiagram0, path) -> None:
    """One death per line; the zero birth column is omitted."""
    with open(path, "w", encoding="ascii") as fh:
        for d in pd.deaths.tolist():
            fh.write(repr(d))
            fh.write("\n")


def load_diagram(path) -> PersistenceDiagram0:
    with open(path, "r", encoding="ascii") as fh:
        vals = [float(line) for line in fh if line.strip()]
    return PersistenceDiagram0(np.array(vals))
