"""Point-cloud generators with known box-counting dimensions.

Used to validate the dimension estimators: middle-thirds Cantor sets
(dimension ln2/ln3 on the line, twice that for the planar product),
the Sierpinski triangle via the chaos game (ln3/ln2), and uniform draws
from the unit cube (ambient dimension).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec
from .matrix_io import DenseMatrix
from .rng import SplitMix64

KINDS = ("cantor_line", "cantor_dust_2d", "sierpinski_triangle", "uniform_cube")

_SIERPINSKI_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
_CHAOS_BURN_IN = 100


@dataclass(frozen=True)
class FractalSpec:
    kind: str
    depth_or_dim: int
    n_points: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown kind {self.kind!r}")
        if self.n_points < 2:
            raise InvalidSpec(f"n_points must be >= 2, got {self.n_points}")
        if self.depth_or_dim < 1:
            raise InvalidSpec(f"depth/dimension must be >= 1, got {self.depth_or_dim}")
        if self.kind == "cantor_line" and self.depth_or_dim > 24:
            raise InvalidSpec("cantor_line enumerates 2^(depth+1) endpoints; depth capped at 24")
        if self.kind == "cantor_dust_2d" and self.depth_or_dim > 38:
            raise InvalidSpec("cantor_dust_2d numerators overflow past depth 38")


def analytic_dimension(spec: FractalSpec) -> float:
    """Textbook box-counting dimension of the underlying set."""
    if spec.kind == "cantor_line":
        return math.log(2.0) / math.log(3.0)
    if spec.kind == "cantor_dust_2d":
        return 2.0 * math.log(2.0) / math.log(3.0)
    if spec.kind == "sierpinski_triangle":
        return math.log(3.0) / math.log(2.0)
    return float(spec.depth_or_dim)


def cantor_endpoint_numerators(depth: int) -> np.ndarray:
    """Numerators over 3^depth of the 2^(depth+1) interval endpoints of
    the middle-thirds construction, sorted ascending. Integer arithmetic
    throughout, so the values are exact."""
    intervals = [(0, 3**depth)]
    for _ in range(depth):
        nxt = []
        for a, b in intervals:
            third = (b - a) // 3
            nxt.append((a, a + third))
            nxt.append((b - third, b))
        intervals = nxt
    nums = sorted({e for ab in intervals for e in ab})
    return np.array(nums, dtype=np.int64)


def _cantor_numerators_for(spec: FractalSpec) -> np.ndarray:
    nums = cantor_endpoint_numerators(spec.depth_or_dim)
    total = nums.size
    if spec.n_points > total:
        raise InvalidSpec(
            f"depth {spec.depth_or_dim} provides only {total} endpoints, "
            f"{spec.n_points} requested"
        )
    if spec.n_points < total:
        keep = np.round(np.linspace(0, total - 1, spec.n_points)).astype(np.int64)
        nums = nums[keep]
    return nums


def _cantor_line(spec: FractalSpec) -> np.ndarray:
    nums = _cantor_numerators_for(spec)
    return (nums / float(3**spec.depth_or_dim)).reshape(-1, 1)


def cantor_line_distances(depth: int, n_points: int, seed: int = 0):
    """Exact pairwise distance matrix of the Cantor endpoint cloud.

    Each distance is an integer numerator difference divided once by
    3^depth, so pairs that sit exactly 3^-k apart compare equal to the
    float of 3^-k. Avoids the cancellation drift of subtracting unit
    -interval coordinates, which can push a boundary pair one ulp past
    the covering scale.
    """
    from .matrix_io import DistanceMatrix

    if depth > 33:
        raise InvalidSpec("3^depth exceeds exact float64 integer range")
    spec = FractalSpec("cantor_line", depth_or_dim=depth, n_points=n_points, seed=seed)
    nums = _cantor_numerators_for(spec)
    iu, ju = np.triu_indices(nums.size, k=1)
    diffs = (nums[ju] - nums[iu]).astype(np.float64)
    return DistanceMatrix(nums.size, diffs / float(3**depth))


def _cantor_draws(stream: SplitMix64, count: int, depth: int) -> np.ndarray:
    """Random points of the depth-truncated Cantor set: ternary digits
    restricted to {0, 2}, exact integer numerators over 3^depth."""
    weights = np.array([3 ** (depth - 1 - j) for j in range(depth)], dtype=np.int64)
    nums = np.empty(count, dtype=np.int64)
    for p in range(count):
        acc = 0
        for j in range(depth):
            acc += 2 * stream.next_below(2) * weights[j]
        nums[p] = acc
    return nums / float(3**depth)


def _cantor_dust(spec: FractalSpec) -> np.ndarray:
    sx = SplitMix64(spec.seed, 0xD0, 0)
    sy = SplitMix64(spec.seed, 0xD0, 1)
    x = _cantor_draws(sx, spec.n_points, spec.depth_or_dim)
    y = _cantor_draws(sy, spec.n_points, spec.depth_or_dim)
    return np.column_stack([x, y])


def _sierpinski(spec: FractalSpec) -> np.ndarray:
    stream = SplitMix64(spec.seed, 0x51)
    pts = np.empty((spec.n_points, 2))
    x, y = _SIERPINSKI_VERTICES[0]
    for t in range(_CHAOS_BURN_IN + spec.n_points):
        vx, vy = _SIERPINSKI_VERTICES[stream.next_below(3)]
        x = 0.5 * (x + vx)
        y = 0.5 * (y + vy)
        if t >= _CHAOS_BURN_IN:
            pts[t - _CHAOS_BURN_IN, 0] = x
            pts[t - _CHAOS_BURN_IN, 1] = y
    return pts


def _uniform_cube(spec: FractalSpec) -> np.ndarray:
    stream = SplitMix64(spec.seed, 0xCB)
    d = spec.depth_or_dim
    return stream.floats(spec.n_points * d).reshape(spec.n_points, d)


def generate(spec: FractalSpec) -> DenseMatrix:
    """Point cloud for the spec, one point per row. Deterministic: the
    same spec always yields the same bytes."""
    if spec.kind == "cantor_line":
        pts = _cantor_line(spec)
    elif spec.kind == "cantor_dust_2d":
        pts = _cantor_dust(spec)
    elif spec.kind == "sierpinski_triangle":
        pts = _sierpinski(spec)
    else:
        pts = _uniform_cube(spec)
    return DenseMatrix(pts)
