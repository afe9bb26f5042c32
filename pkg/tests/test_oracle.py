import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from greedycover import instances
from greedycover.oracle import (
    direction_grid_cylinder,
    exact_meb_2d,
    fibonacci_directions,
    grid_translation_oracle,
    rotation_grid_oracle,
)
from greedycover.shapes import AngularProfile, make_shape


def _pairs_and_triples_reference(pts):
    """Minimum enclosing circle by checking every pair and triple (tiny inputs only)."""
    best = (None, math.inf)
    n = len(pts)

    def consider(c, r):
        nonlocal best
        if r < best[1] and np.all(np.linalg.norm(pts - c, axis=1) <= r + 1e-9):
            best = (c, r)

    if n == 1:
        return pts[0], 0.0
    for i in range(n):
        for j in range(i + 1, n):
            c = (pts[i] + pts[j]) / 2
            consider(c, np.linalg.norm(pts[i] - c))
            for k in range(j + 1, n):
                a, b, cc = pts[i], pts[j], pts[k]
                d = 2 * (a[0] * (b[1] - cc[1]) + b[0] * (cc[1] - a[1]) + cc[0] * (a[1] - b[1]))
                if abs(d) < 1e-12:
                    continue
                ux = ((a @ a) * (b[1] - cc[1]) + (b @ b) * (cc[1] - a[1]) + (cc @ cc) * (a[1] - b[1])) / d
                uy = ((a @ a) * (cc[0] - b[0]) + (b @ b) * (a[0] - cc[0]) + (cc @ cc) * (b[0] - a[0])) / d
                center = np.array([ux, uy])
                consider(center, np.linalg.norm(a - center))
    return best


def test_exact_meb_two_points():
    ball = exact_meb_2d([[-1.0, 0.0], [1.0, 0.0]])
    assert np.allclose(ball.center, (0, 0)) and ball.radius == pytest.approx(1.0)


def test_exact_meb_single_point():
    assert exact_meb_2d([[0.0, 0.0]]).radius == 0.0


def test_exact_meb_obtuse_triangle():
    pts = np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 0.5]])
    ball = exact_meb_2d(pts)
    assert np.allclose(ball.center, (2, 0)) and ball.radius == pytest.approx(2.0)


def test_exact_meb_empty():
    with pytest.raises(ValueError):
        exact_meb_2d(np.empty((0, 2)))


@settings(max_examples=60)
@given(arrays(float, st.tuples(st.integers(1, 9), st.just(2)), elements=st.floats(-10, 10, allow_nan=False)))
def test_exact_meb_matches_brute_force(pts):
    ball = exact_meb_2d(pts)
    _, r = _pairs_and_triples_reference(pts)
    assert ball.radius == pytest.approx(r, rel=1e-9, abs=1e-9)
    assert np.all(np.linalg.norm(pts - ball.center, axis=1) <= ball.radius + 1e-9)


def test_grid_recovers_planted_pose_on_a_node():
    half = np.array([0.5, 0.25])
    t = np.array([0.3, -0.2])
    corners = t + np.array([[1, 1], [-1, -1], [1, -1], [-1, 1]]) * half
    res = grid_translation_oracle(corners, make_shape("box", half, 2), 1.0, 0.1)
    assert np.allclose(res.translation, t) and res.max_violation == pytest.approx(0.0, abs=1e-12)


def test_grid_single_point():
    res = grid_translation_oracle([[0.37, 0.11]], make_shape("ball", [1.0], 2), 1.0, 0.05)
    assert res.max_violation == 0.0


def test_grid_limits():
    ball = make_shape("ball", [1.0], 4)
    with pytest.raises(ValueError):
        grid_translation_oracle(np.zeros((2, 4)), ball, 1.0, 0.1)
    with pytest.raises(ValueError):
        grid_translation_oracle(np.zeros((2, 2)), make_shape("ball", [1.0], 2), 1.0, 1e-6)
    with pytest.raises(ValueError):
        grid_translation_oracle(np.zeros((2, 2)), make_shape("ellipsoid", [1.0], 2), 1.0, 0.1)


def test_fibonacci_directions_are_unit_and_spread():
    dirs = fibonacci_directions(2000)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)
    assert np.abs(dirs.mean(axis=0)).max() < 0.01


def test_direction_grid_collinear():
    pts = np.outer(np.linspace(0, 1, 5), [1.0, 0.0, 0.0])
    assert direction_grid_cylinder(pts, k=100_000).radius <= 1e-2


def test_direction_grid_planted():
    inst = instances.cylinder(300, 3, seed=0)
    res = direction_grid_cylinder(inst.points, k=100_000)
    assert 1.0 - 1e-9 <= res.radius <= 1.01


def test_direction_grid_reduces_to_exact_circle():
    k = 500
    u = fibonacci_directions(k)[123]
    helper = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(u, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    rng = np.random.default_rng(3)
    pts2 = rng.normal(size=(40, 2))
    # a long thin cloud makes the grid direction u the best one
    pts = pts2[:, :1] * e1 + pts2[:, 1:] * e2 + rng.uniform(-50, 50, (40, 1)) * u
    res = direction_grid_cylinder(pts, k=k)
    assert np.allclose(res.axis, u)
    assert res.radius == pytest.approx(exact_meb_2d(pts2).radius, rel=1e-9)


def test_rotation_grid_all_inside():
    pts = np.array([[0.0, 0.0, 1.0], [0.05, 0.0, 0.5]])
    res = rotation_grid_oracle(pts, AngularProfile("cone", (0.4,)), k=500)
    assert res.max_violation == 0.0


def test_rotation_grid_planted_cone():
    inst = instances.cone(300, 3, seed=2)
    res = rotation_grid_oracle(inst.points, AngularProfile("cone", (0.4,)), k=20_000)
    assert res.max_violation <= 0.03


def test_rotation_grid_single_point():
    res = rotation_grid_oracle([[0.3, -0.4, 0.5]], AngularProfile("half-cylinder", (0.1,)), k=5000)
    assert res.max_violation <= 0.03
