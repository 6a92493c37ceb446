"""Fractal dimension estimators.

Two routes: the degree-0 persistence estimator (subsample the cloud at a
ladder of sizes, regress log weighted lifetime sums on log size, map the
slope a to alpha/(1-a)) and a box-counting estimate from greedy
farthest-point coverings (slope of log covering count against log inverse
scale). The two agree on bounded (pseudo-)metric spaces, which the test
suite checks on clouds with known dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyDeltaList,
    SizesOutOfRange,
    TooFewPoints,
    ValidationError,
    ZeroLifetimes,
)
from .matrix_io import DistanceMatrix
from .ph0 import subset_persistence0, weighted_life_sum
from .rng import SplitMix64

_LN2 = math.log(2.0)

DEFAULT_N_SIZES = 20
DEFAULT_TRIALS = 5
DEFAULT_N_DELTAS = 8
DEFAULT_DELTA_HI_DIV = 4.0
DEFAULT_DELTA_LO_DIV = 256.0


@dataclass(frozen=True)
class DimensionEstimate:
    alpha: float
    sizes: tuple[int, ...]
    trials_per_size: int
    log_e_records: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    dimension: float
    r_squared: float
    seed: int
    valid: bool
    dropped_sizes: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "sizes": list(self.sizes),
            "trials_per_size": self.trials_per_size,
            "log_e_records": [list(r) for r in self.log_e_records],
            "slope": self.slope,
            "intercept": self.intercept,
            "dimension": self.dimension,
            "r_squared": self.r_squared,
            "seed": self.seed,
            "valid": self.valid,
            "dropped_sizes": list(self.dropped_sizes),
        }


@dataclass(frozen=True)
class BoxDimEstimate:
    deltas: tuple[float, ...]
    counts: tuple[int, ...]
    slope: float
    r_squared: float

    @property
    def dimension(self) -> float:
        return self.slope

    def to_dict(self) -> dict:
        return {
            "deltas": list(self.deltas),
            "counts": list(self.counts),
            "slope": self.slope,
            "r_squared": self.r_squared,
        }


def default_sizes(n_pts: int, count: int = DEFAULT_N_SIZES) -> list[int]:
    """count subset sizes evenly spaced between ceil(n/5) and n."""
    lo = max(2, math.ceil(n_pts / 5))
    raw = np.round(np.linspace(lo, n_pts, count)).astype(int)
    return sorted(set(int(v) for v in raw))


def _validate_sizes(sizes, n_pts: int) -> list[int]:
    sizes = [int(s) for s in sizes]
    if len(sizes) < 3:
        raise SizesOutOfRange("need at least 3 subset sizes for a fit")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise SizesOutOfRange("sizes must be strictly increasing")
    if sizes[0] < 2 or sizes[-1] > n_pts:
        raise SizesOutOfRange(
            f"sizes must lie in [2, {n_pts}], got [{sizes[0]}, {sizes[-1]}]"
        )
    return sizes


def estimate_ph_dim(
    D: DistanceMatrix,
    alpha: float = 1.0,
    sizes=None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> DimensionEstimate:
    """Persistence-based dimension of the cloud behind a distance matrix.

    For each size, `trials` uniform subsets are drawn without replacement
    (stream derived from (seed, size_index, trial_index), so results are
    independent of execution order), the weighted lifetime sum of each
    subset diagram is computed, and its log is averaged across trials.
    Ordinary least squares on (log size, mean log sum) gives the slope.
    A size is dropped whenever any of its trials produced a zero sum; if
    fewer than 3 sizes survive the cloud is reported as degenerate.

    Internally each log sum is carried as (log mantissa, exponent) from
    frexp, and the regression works on deviations of those two parts.
    Scaling all distances by a power of two shifts only the exponents,
    uniformly, so slope, r_squared and the dimension are bit-identical
    under such scalings.
    """
    if alpha <= 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if sizes is None and D.n_pts < 4:
        raise TooFewPoints(
            f"{D.n_pts} points cannot fill the default size schedule"
        )
    sizes = _validate_sizes(
        default_sizes(D.n_pts) if sizes is None else sizes, D.n_pts
    )

    kept_x: list[float] = []
    kept_u: list[float] = []  # per-size mean of log mantissa
    kept_v: list[int] = []  # per-size sum of exponents
    dropped: list[int] = []
    for si, size in enumerate(sizes):
        u_sum = 0.0
        v_sum = 0
        alive = True
        for ti in range(trials):
            stream = SplitMix64(seed, si, ti)
            subset = stream.sample_sorted(D.n_pts, size)
            e_alpha = weighted_life_sum(subset_persistence0(D, subset), alpha)
            if e_alpha == 0.0:
                alive = False
                break
            mant, expo = math.frexp(e_alpha)
            u_sum += math.log(mant)
            v_sum += expo
        if alive:
            kept_x.append(math.log(size))
            kept_u.append(u_sum / trials)
            kept_v.append(v_sum)
        else:
            dropped.append(size)

    if len(kept_x) < 3:
        raise ZeroLifetimes(
            "lifetime sums vanished on too many subset sizes "
            f"({len(kept_x)} of {len(sizes)} survived); the cloud is degenerate"
        )

    x = np.array(kept_x)
    u = np.array(kept_u)
    v = np.array(kept_v, dtype=np.int64)
    # exponent deviations are shift-invariant integers; see docstring
    w = (v - v[0]).astype(np.float64)
    dx = x - x.mean()
    dy = (u - u.mean()) + (_LN2 / trials) * (w - w.mean())
    sxx = float(dx @ dx)
    sxy = float(dx @ dy)
    syy = float(dy @ dy)
    slope = sxy / sxx
    r_squared = 1.0 if syy == 0.0 else min(1.0, (sxy * sxy) / (sxx * syy))
    mean_log_e = u + _LN2 * (v / trials)
    intercept = float(mean_log_e.mean() - slope * x.mean())
    if slope < 1.0:
        dimension = alpha / (1.0 - slope)
        valid = True
    else:
        dimension = math.inf
        valid = False
    return DimensionEstimate(
        alpha=float(alpha),
        sizes=tuple(sizes),
        trials_per_size=trials,
        log_e_records=tuple(
            (float(a), float(b)) for a, b in zip(x.tolist(), mean_log_e.tolist())
        ),
        slope=float(slope),
        intercept=intercept,
        dimension=float(dimension),
        r_squared=float(r_squared),
        seed=seed,
        valid=valid,
        dropped_sizes=tuple(dropped),
    )


def farthest_point_radii(D: DistanceMatrix, stop_below: float = 0.0) -> np.ndarray:
    """Insertion radii of the farthest-point traversal started at point 0.

    radii[k] is the covering radius achieved by the first k+1 centers;
    the sequence is nonincreasing, and the greedy covering count at scale
    delta is the first k with radii[k] <= delta. Stops early once the
    radius drops to stop_below or fewer.
    """
    n = D.n_pts
    mind = D.row(0)
    radii = []
    for _ in range(n - 1):
        far = int(np.argmax(mind))
        r = float(mind[far])
        radii.append(r)
        if r <= stop_below:
            break
        np.minimum(mind, D.row(far), out=mind)
    else:
        radii.append(float(np.max(mind)))
    return np.array(radii)


def greedy_cover_count(D: DistanceMatrix, delta: float) -> int:
    """Number of closed delta-balls the greedy farthest-point strategy
    needs to cover the cloud; an upper bound on the minimal number."""
    if delta < 0:
        raise ValidationError("delta must be nonnegative")
    radii = farthest_point_radii(D, stop_below=delta)
    count = 1
    for r in radii:
        if r <= delta:
            break
        count += 1
    return count


def default_deltas(D: DistanceMatrix, count: int = DEFAULT_N_DELTAS) -> list[float]:
    """Logarithmically spaced scales between diameter/4 and diameter/256,
    decreasing."""
    diam = D.diameter()
    if diam <= 0:
        raise ValidationError("cannot build a delta schedule for a zero-diameter cloud")
    return list(
        np.geomspace(diam / DEFAULT_DELTA_HI_DIV, diam / DEFAULT_DELTA_LO_DIV, count)
    )


def estimate_box_dim(
    D: DistanceMatrix, deltas=None, strategy: str = "greedy_farthest"
) -> BoxDimEstimate:
    """Box-counting dimension from covering counts at the given scales
    (strictly decreasing). Counts come from one farthest-point traversal,
    thresholded per scale, so they are nondecreasing as delta shrinks."""
    if strategy != "greedy_farthest":
        raise ValidationError(f"unknown covering strategy {strategy!r}")
    if deltas is None:
        deltas = default_deltas(D)
    deltas = [float(d) for d in deltas]
    if not deltas:
        raise EmptyDeltaList("no covering scales given")
    if any(d <= 0 for d in deltas):
        raise ValidationError("covering scales must be positive")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValidationError("covering scales must be strictly decreasing")

    radii = farthest_point_radii(D, stop_below=deltas[-1])
    counts = []
    for d in deltas:
        count = 1
        for r in radii:
            if r <= d:
                break
            count += 1
        counts.append(count)

    x = -np.log(np.array(deltas))
    y = np.log(np.array(counts, dtype=np.float64))
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    sxy = float(dx @ dy)
    syy = float(dy @ dy)
    slope = sxy / sxx
    r_squared = 1.0 if syy == 0.0 else min(1.0, (sxy * sxy) / (sxx * syy))
    return BoxDimEstimate(
        deltas=tuple(deltas),
        counts=tuple(counts),
        slope=float(slope),
        r_squared=float(r_squared),
    )


@dataclass(frozen=True)
class DimComparison:
    ph: DimensionEstimate
    box: BoxDimEstimate
    abs_difference: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "abs_difference", abs(self.ph.dimension - self.box.slope)
        )

    @property
    def ph_dim(self) -> float:
        return self.ph.dimension

    @property
    def box_dim(self) -> float:
        return self.box.slope

    def to_dict(self) -> dict:
        return {
            "ph_dim": self.ph.dimension,
            "box_dim": self.box.slope,
            "abs_difference": self.abs_difference,
            "ph": self.ph.to_dict(),
            "box": self.box.to_dict(),
        }


def compare_dims(
    D: DistanceMatrix,
    alpha: float = 1.0,
    sizes=None,
    trials: int = DEFAULT_TRIALS,
    deltas=None,
    seed: int = 0,
) -> DimComparison:
    """Run both estimators on the same cloud and report the discrepancy."""
    ph = estimate_ph_dim(D, alpha=alpha, sizes=sizes, trials=trials, seed=seed)
    box = estimate_box_dim(D, deltas=deltas)
    return DimComparison(ph=ph, box=box)


def rho_subsample_robustness(
    losses,
    fractions,
    metric_seed: int,
    alpha: float = 1.0,
    sizes=None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> list[tuple[float, float, float]]:
    """Dimension under the column-subsampled pseudo-metric versus the
    full one.

    Returns (fraction, dimension, relative_error) per fraction, with the
    relative error taken against the full-data dimension. The estimator
    seed is shared by every run and the column draws share one stream, so
    smaller fractions use nested subsets and the observed differences
    come from the metric approximation alone.
    """
    from .metric import KIND_LOSS_SUB, MetricSpec, distance_matrix_from_losses

    fractions = [float(f) for f in fractions]
    if not fractions:
        raise ValidationError("no fractions given")
    if any(not 0.0 < f <= 1.0 for f in fractions):
        raise ValidationError("fractions must lie in (0, 1]")

    d_full = distance_matrix_from_losses(losses, MetricSpec())
    full_dim = estimate_ph_dim(
        d_full, alpha=alpha, sizes=sizes, trials=trials, seed=seed
    ).dimension
    rows = []
    for f in fractions:
        spec = MetricSpec(kind=KIND_LOSS_SUB, fraction=f, seed=metric_seed)
        d_sub = distance_matrix_from_losses(losses, spec)
        dim = estimate_ph_dim(
            d_sub, alpha=alpha, sizes=sizes, trials=trials, seed=seed
        ).dimension
        rows.append((f, dim, abs(dim - full_dim) / full_dim))
    return rows
