import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from greedycover import instances
from greedycover.meb import meb_fixed_radius
from greedycover.mincon import default_iter_cap, mincon_fixed_scale, mincon_scale_search, mincon_union
from greedycover.oracle import grid_translation_oracle
from greedycover.shapes import UnionShape, make_shape
from greedycover.trace import Status


def test_ball_shape_matches_meb():
    inst = instances.sphere_shell(300, 6, seed=2)
    eps = 0.1
    a = meb_fixed_radius(inst.points, 1.0, eps, iter_cap=default_iter_cap(eps))
    b = mincon_fixed_scale(inst.points, make_shape("ball", [1.0], 6), eps, r_scale=1.0)
    assert a.status is b.status
    assert [r["violator_index"] for r in a.trace.records] == b.visited
    assert np.allclose(a.ball.center, b.translation)


def test_unit_square_single_move():
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    square = make_shape("box", [0.5], 2)
    res = mincon_fixed_scale(corners, square, 0.1, start=(1.0, 0.5), r_scale=1.0)
    assert res.status is Status.COVERED and res.iterations == 1
    assert np.allclose(np.diff(np.array(res.path), axis=0), [[-0.5, 0.0]])


def test_box_instance_d10():
    inst = instances.box(400, 10, seed=0)
    shape = make_shape("box", inst.planted["shape"]["params"], 10)
    res = mincon_fixed_scale(inst.points, shape, 0.1)
    assert res.status is Status.COVERED and res.iterations <= 101


def test_potential_decrease_on_ellipsoid():
    inst = instances.ellipsoid(400, 6, seed=3)
    shape = make_shape("ellipsoid", inst.planted["shape"]["params"], 6)
    eps = 0.1
    res = mincon_fixed_scale(inst.points, shape, eps)
    t_star = np.asarray(inst.planted["translation"])
    v2 = [float(np.sum((t - t_star) ** 2)) for t in res.path]
    tol = eps * res.r_scale / 10
    for k, m in enumerate(res.trace.column("move_length")):
        assert v2[k + 1] <= v2[k] - m * m + 10 * tol


def test_shrunk_shape_hits_cap():
    inst = instances.box(200, 4, seed=1)
    shape = make_shape("box", inst.planted["shape"]["params"], 4, scale=0.5)
    res = mincon_fixed_scale(inst.points, shape, 0.1)
    assert res.status is Status.CAP_EXCEEDED and res.iterations == default_iter_cap(0.1)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        mincon_fixed_scale(np.zeros((3, 2)), make_shape("ball", [1.0], 3), 0.1)


def test_scale_search_unit_square():
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    eps = 0.05
    res = mincon_scale_search(corners, make_shape("box", [0.5], 2), eps)
    assert 1.0 - 1e-9 <= res.scale <= 1 + eps


def test_scale_search_single_point():
    res = mincon_scale_search([[1.0, 2.0]], make_shape("box", [0.5], 2), 0.1)
    assert res.scale == 0.0 and res.status is Status.COVERED


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_scale_search_planted_box(seed):
    inst = instances.box(300, 10, seed=seed)
    eps = 0.1
    res = mincon_scale_search(inst.points, make_shape("box", inst.planted["shape"]["params"], 10), eps)
    assert res.scale <= 1 + eps


def test_scale_search_vertex_hull_doubles_bracket():
    tri = np.array([[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]])
    rng = np.random.default_rng(0)
    w = rng.dirichlet(np.ones(3), size=80)
    cloud = 2.0 * w @ tri + np.array([3.0, -1.0])
    res = mincon_scale_search(cloud, make_shape("vertex-hull", tri, 2), 0.1)
    assert res.status is Status.COVERED and res.scale <= 2.0 * 1.1


@settings(max_examples=15, deadline=None)
@given(arrays(float, (12, 2), elements=st.floats(-1, 1, allow_nan=False)))
def test_fixed_scale_agrees_with_grid_oracle(cloud):
    shape = make_shape("box", [0.6, 0.4], 2)
    eps = 0.1
    grid = grid_translation_oracle(cloud, shape, 1.2, 0.02)
    res = mincon_fixed_scale(cloud, shape.with_pose(scale=1.2), eps)
    if res.status is Status.COVERED:
        assert res.max_violation <= eps * res.r_scale
    slack = 0.02 * math.sqrt(2) / 2
    if grid.max_violation <= 1e-12:
        # a covering pose exists, so the solver must not fail to cover
        assert res.status is Status.COVERED
    if res.status is Status.COVERED:
        assert grid.max_violation <= res.max_violation + slack + 1e-12


def _dumbbell(seed):
    inst = instances.dumbbell_union(200, 3, seed=seed)
    parts = tuple(make_shape(p["kind"], p["params"], 3, translation=p["offset"]) for p in inst.planted["parts"])
    return inst, UnionShape(parts)


def test_union_single_part_matches_fixed_scale():
    inst = instances.box(150, 3, seed=4)
    shape = make_shape("box", inst.planted["shape"]["params"], 3)
    a = mincon_fixed_scale(inst.points, shape, 0.2)
    b = mincon_union(inst.points, UnionShape((shape,)), 0.2)
    assert a.status is b.status and a.visited == [r["violator_index"] for r in b.trace.records]
    assert np.allclose(a.translation, b.union.translation)


def test_union_exhaustive_covers_dumbbell():
    inst, union = _dumbbell(0)
    res = mincon_union(inst.points, union, 0.3, strategy="exhaustive")
    assert res.status is Status.COVERED
    assert res.union.violations(inst.points).max() <= 0.3 * np.linalg.norm(inst.points - inst.points[0], axis=1).max()


def test_union_randomized_covers_dumbbell():
    inst, union = _dumbbell(0)
    res = mincon_union(inst.points, union, 0.3, strategy="randomized", restarts=32, seed=1)
    assert res.status is Status.COVERED


def test_union_exhaustive_budget_is_honest():
    inst, union = _dumbbell(1)
    shrunk = union.with_pose(scale=0.3)
    res = mincon_union(inst.points, shrunk, 0.3, strategy="exhaustive", budget=50)
    assert res.status is Status.CAP_EXCEEDED and res.nodes == 50


def test_union_unknown_strategy():
    inst, union = _dumbbell(0)
    with pytest.raises(ValueError):
        mincon_union(inst.points, union, 0.3, strategy="oracle-guided")


def test_union_randomized_is_reproducible():
    inst, union = _dumbbell(2)
    a = mincon_union(inst.points, union, 0.3, strategy="randomized", seed=5)
    b = mincon_union(inst.points, union, 0.3, strategy="randomized", seed=5)
    assert a.guesses == b.guesses and a.trace.to_csv() == b.trace.to_csv()
