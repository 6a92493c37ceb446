import math

import numpy as np
import pytest

from conftest import lattice_pseudo_metric
from oracles import brute_cover
from fracdim.dimest import (
    compare_dims,
    default_deltas,
    default_sizes,
    estimate_box_dim,
    estimate_ph_dim,
    greedy_cover_count,
    rho_subsample_robustness,
)
from fracdim.errors import (
    EmptyDeltaList,
    SizesOutOfRange,
    ValidationError,
    ZeroLifetimes,
)
from fracdim.matrix_io import DenseMatrix, DistanceMatrix, LossMatrix
from fracdim.metric import distance_matrix_euclidean
from fracdim.synth import FractalSpec, cantor_line_distances, generate


def _euclid(kind, depth, n, seed):
    return distance_matrix_euclidean(generate(FractalSpec(kind, depth, n, seed=seed)))


def test_identical_points_raise_zero_lifetimes():
    d = DistanceMatrix(64, np.zeros(64 * 63 // 2))
    with pytest.raises(ZeroLifetimes):
        estimate_ph_dim(d, sizes=[8, 16, 32], trials=2, seed=0)


def test_line_segment_dimension():
    # 4096 uniform points on a segment; analytic target 1
    d = _euclid("uniform_cube", 1, 4096, seed=2)
    sizes = [int(v) for v in np.linspace(512, 4096, 8)]
    est = estimate_ph_dim(d, alpha=1.0, sizes=sizes, trials=10, seed=2)
    assert 0.85 <= est.dimension <= 1.15
    assert est.valid


def test_unit_square_dimension():
    d = _euclid("uniform_cube", 2, 4096, seed=2)
    sizes = [int(v) for v in np.linspace(512, 4096, 8)]
    est = estimate_ph_dim(d, alpha=1.0, sizes=sizes, trials=10, seed=2)
    assert 1.75 <= est.dimension <= 2.25
    assert 0.0 <= est.r_squared <= 1.0


def test_estimate_is_deterministic():
    d = _euclid("uniform_cube", 2, 512, seed=1)
    a = estimate_ph_dim(d, seed=42)
    b = estimate_ph_dim(d, seed=42)
    assert a == b
    assert a != estimate_ph_dim(d, seed=43)


def test_scale_invariance_bit_exact():
    d = _euclid("uniform_cube", 2, 512, seed=9)
    base = estimate_ph_dim(d, seed=7)
    for c in (0.5, 2.0, 8.0):
        scaled = estimate_ph_dim(d.scaled(c), seed=7)
        assert scaled.dimension == base.dimension
        assert scaled.slope == base.slope
        assert scaled.r_squared == base.r_squared


def test_slope_at_least_one_reports_infinite_dimension():
    # points with wildly geometric gaps: subset ranges explode as larger
    # indices enter, so log E outruns log n and the fitted slope passes 1
    n = 10
    pts = (16.0 ** np.arange(n)).reshape(-1, 1)
    d = distance_matrix_euclidean(DenseMatrix(pts))
    est = estimate_ph_dim(d, sizes=[2, 3, 4, 6, 8, 10], trials=4, seed=3)
    assert est.slope >= 1.0
    assert not est.valid
    assert math.isinf(est.dimension)


def test_sizes_validation():
    d = _euclid("uniform_cube", 1, 64, seed=0)
    with pytest.raises(SizesOutOfRange):
        estimate_ph_dim(d, sizes=[4, 8])
    with pytest.raises(SizesOutOfRange):
        estimate_ph_dim(d, sizes=[4, 4, 8])
    with pytest.raises(SizesOutOfRange):
        estimate_ph_dim(d, sizes=[4, 8, 128])
    with pytest.raises(SizesOutOfRange):
        estimate_ph_dim(d, sizes=[1, 8, 16])
    with pytest.raises(ValidationError):
        estimate_ph_dim(d, alpha=0.0)
    with pytest.raises(ValidationError):
        estimate_ph_dim(d, trials=0)


def test_default_sizes_schedule():
    sizes = default_sizes(4096)
    assert len(sizes) == 20
    assert sizes[0] == math.ceil(4096 / 5)
    assert sizes[-1] == 4096
    assert all(b > a for a, b in zip(sizes, sizes[1:]))


def test_records_shape_and_fit_quality():
    d = _euclid("uniform_cube", 2, 1024, seed=4)
    est = estimate_ph_dim(d, seed=1)
    assert len(est.log_e_records) == len(est.sizes) - len(est.dropped_sizes)
    assert 0.0 <= est.r_squared <= 1.0
    xs = [r[0] for r in est.log_e_records]
    assert xs == sorted(xs)


# --- box dimension ----------------------------------------------------------


def test_cover_count_one_at_diameter(rng):
    d = lattice_pseudo_metric(rng, 20)
    assert greedy_cover_count(d, d.diameter()) == 1
    assert greedy_cover_count(d, d.diameter() * 2) == 1


def test_cover_two_points():
    d = DistanceMatrix(2, np.array([1.0]))
    assert greedy_cover_count(d, 0.4) == 2
    assert greedy_cover_count(d, 1.0) == 1


def test_exact_cantor_covering_counts():
    d = cantor_line_distances(depth=9, n_points=1024)
    for k in range(1, 6):
        assert greedy_cover_count(d, 1.0 / 3**k) == 2**k


def test_greedy_upper_bounds_exact_cover(rng):
    for _ in range(30):
        n = int(rng.integers(3, 13))
        d = lattice_pseudo_metric(rng, n)
        delta = float(rng.random()) * max(d.diameter(), 1.0)
        assert greedy_cover_count(d, delta) >= brute_cover(d, delta)


def test_box_dim_counts_monotone():
    d = _euclid("uniform_cube", 2, 1024, seed=6)
    est = estimate_box_dim(d)
    assert len(est.deltas) == 8
    assert all(b >= a for a, b in zip(est.counts, est.counts[1:]))
    assert all(c >= 1 for c in est.counts)


def test_box_dim_validation():
    d = _euclid("uniform_cube", 1, 32, seed=0)
    with pytest.raises(EmptyDeltaList):
        estimate_box_dim(d, deltas=[])
    with pytest.raises(ValidationError):
        estimate_box_dim(d, deltas=[0.5, 0.7])
    with pytest.raises(ValidationError):
        estimate_box_dim(d, deltas=[0.5, -0.1])
    with pytest.raises(ValidationError):
        estimate_box_dim(d, strategy="exhaustive")
    with pytest.raises(ValidationError):
        default_deltas(DistanceMatrix(3, np.zeros(3)))


def test_cantor_box_dimension_near_target():
    d = cantor_line_distances(depth=11, n_points=4096)
    est = estimate_box_dim(d)
    assert abs(est.slope - math.log(2) / math.log(3)) < 0.1


def test_lifetime_estimator_saturates_at_alpha():
    """The lifetime-sum regression cannot report a dimension below alpha:
    for sets of dimension < alpha the sums are bounded, the slope fit
    tends to 0 and the estimate degenerates to alpha itself. On a Cantor
    cloud alpha=1 therefore returns 1, and only alpha < dim moves the
    estimate toward the true value."""
    d = cantor_line_distances(depth=9, n_points=1024)
    at_one = estimate_ph_dim(d, alpha=1.0, trials=3, seed=1)
    assert at_one.dimension == pytest.approx(1.0, abs=0.05)
    below = estimate_ph_dim(d, alpha=0.5, trials=3, seed=1)
    assert 0.55 <= below.dimension <= 0.90
    assert below.dimension < at_one.dimension


def test_compare_dims_degenerate_cloud():
    d = DistanceMatrix(32, np.zeros(32 * 31 // 2))
    with pytest.raises(ZeroLifetimes):
        compare_dims(d, sizes=[4, 8, 16], trials=2, seed=0)


def test_compare_dims_reports_difference():
    d = _euclid("uniform_cube", 2, 1024, seed=3)
    cmp = compare_dims(d, seed=5)
    assert cmp.abs_difference == abs(cmp.ph_dim - cmp.box_dim)
    assert cmp.to_dict()["ph_dim"] == cmp.ph_dim


def test_robustness_smoke(rng):
    # random-walk rows mimic a trajectory; iid rows would concentrate all
    # pairwise distances and push the fitted slope to 1
    walk = np.cumsum(rng.standard_normal((96, 300)) * 0.05, axis=0) + 1.0
    losses = LossMatrix(DenseMatrix(walk))
    rows = rho_subsample_robustness(
        losses, [0.1, 0.5, 1.0], metric_seed=1, sizes=[24, 48, 96], trials=2, seed=2
    )
    assert len(rows) == 3
    assert rows[-1][0] == 1.0
    assert rows[-1][2] == 0.0  # fraction 1.0 reproduces the full metric
    for _, dim, err in rows:
        assert dim > 0 and err >= 0
    with pytest.raises(ValidationError):
        rho_subsample_robustness(losses, [], metric_seed=1)
