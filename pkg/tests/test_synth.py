import math

import numpy as np
import pytest

from fracdim.errors import InvalidSpec
from fracdim.matrix_io import save_matrix
from fracdim.synth import (
    FractalSpec,
    analytic_dimension,
    cantor_endpoint_numerators,
    cantor_line_distances,
    generate,
)


def test_depth_one_endpoints():
    pts = generate(FractalSpec("cantor_line", 1, 4)).data[:, 0]
    assert pts.tolist() == [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]


def test_endpoint_counts_double_per_level():
    for depth in range(1, 8):
        assert cantor_endpoint_numerators(depth).size == 2 ** (depth + 1)


def test_cantor_subsampling_keeps_extremes():
    pts = generate(FractalSpec("cantor_line", 10, 1024, seed=7)).data[:, 0]
    assert pts.size == 1024
    assert pts[0] == 0.0 and pts[-1] == 1.0
    assert np.all(np.diff(pts) > 0)


def test_cantor_oversampling_rejected():
    with pytest.raises(InvalidSpec):
        generate(FractalSpec("cantor_line", 2, 100))


def test_cantor_points_avoid_middle_thirds():
    # no endpoint may fall strictly inside the first removed gap
    pts = generate(FractalSpec("cantor_line", 8, 512, seed=1)).data[:, 0]
    assert not np.any((pts > 1.0 / 3.0) & (pts < 2.0 / 3.0))


def test_uniform_cube_range():
    pts = generate(FractalSpec("uniform_cube", 1, 500, seed=3)).data
    assert pts.shape == (500, 1)
    assert pts.min() >= 0.0 and pts.max() < 1.0


def test_uniform_cube_dimension_field():
    pts = generate(FractalSpec("uniform_cube", 3, 64, seed=3)).data
    assert pts.shape == (64, 3)


def test_sierpinski_inside_hull():
    pts = generate(FractalSpec("sierpinski_triangle", 1, 4096, seed=5)).data
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    # barycentric membership oracle for each point
    t = np.column_stack([v[1] - v[0], v[2] - v[0]])
    inv = np.linalg.inv(t)
    lam = (pts - v[0]) @ inv.T
    eps = 1e-9
    assert np.all(lam >= -eps)
    assert np.all(lam.sum(axis=1) <= 1 + eps)


def test_cantor_dust_coordinates_are_cantor_points():
    depth = 6
    pts = generate(FractalSpec("cantor_dust_2d", depth, 200, seed=9)).data
    scaled = pts * 3**depth
    nums = np.round(scaled).astype(np.int64)
    assert np.allclose(scaled, nums, atol=1e-9)
    for coord in nums.ravel():
        digits = np.base_repr(coord, base=3)
        assert "1" not in digits


def test_determinism_bytes(tmp_path):
    spec = FractalSpec("sierpinski_triangle", 1, 256, seed=11)
    p1, p2 = tmp_path / "a.fdm", tmp_path / "b.fdm"
    save_matrix(generate(spec), p1)
    save_matrix(generate(spec), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_seed_changes_random_kinds():
    a = generate(FractalSpec("uniform_cube", 2, 64, seed=1)).data
    b = generate(FractalSpec("uniform_cube", 2, 64, seed=2)).data
    assert not np.array_equal(a, b)


def test_analytic_dimensions():
    assert analytic_dimension(FractalSpec("cantor_line", 5, 8)) == pytest.approx(0.6309, abs=1e-4)
    assert analytic_dimension(FractalSpec("cantor_dust_2d", 5, 8)) == pytest.approx(1.2619, abs=1e-4)
    assert analytic_dimension(FractalSpec("sierpinski_triangle", 1, 8)) == pytest.approx(1.5850, abs=1e-4)
    assert analytic_dimension(FractalSpec("uniform_cube", 4, 8)) == 4.0


def test_exact_distance_matrix_boundary_pairs():
    d = cantor_line_distances(depth=5, n_points=64)
    # the (2/3, 1) pair must land exactly on the float of 1/3
    dense = d.to_dense().data
    assert dense.max() == 1.0
    pts = generate(FractalSpec("cantor_line", 5, 64)).data[:, 0]
    i = int(np.where(pts == pts[pts <= 2 / 3 + 1e-12].max())[0][-1])
    assert d.get(i, 63) == 1.0 / 3.0


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        FractalSpec("pentagon", 3, 100)
    with pytest.raises(InvalidSpec):
        FractalSpec("cantor_line", 0, 10)
    with pytest.raises(InvalidSpec):
        FractalSpec("cantor_line", 3, 1)
