import numpy as np
import pytest

from fracdim.matrix_io import DenseMatrix, DistanceMatrix
from fracdim.metric import distance_matrix_euclidean


def lattice_pseudo_metric(rng: np.random.Generator, n: int, grid: int = 4) -> DistanceMatrix:
    """Random pseudo-distance matrix that genuinely satisfies the triangle
    inequality: l2 distances between small integer lattice points.

    Duplicated points produce zero blocks, and the coarse lattice forces
    plenty of exactly tied distances.
    """
    pts = rng.integers(0, grid, size=(n, 2)).astype(np.float64)
    if n >= 3:
        # force at least one duplicate pair
        pts[n - 1] = pts[0]
    return distance_matrix_euclidean(DenseMatrix(pts))


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
