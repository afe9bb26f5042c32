import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedycover import instances
from greedycover.geom import angle_between
from greedycover.oracle import rotation_grid_oracle
from greedycover.rotation import AxisState, HalfSpaceConstraint, fullrot, minrot, normalized_violations
from greedycover.shapes import AngularProfile
from greedycover.trace import ROTATION_COLUMNS, Status

CONE = AngularProfile("cone", (0.4,))


def _cone_instance(seed, dim=8):
    inst = instances.cone(300, dim, seed)
    return inst, HalfSpaceConstraint(inst.planted["halfspace_normal"])


def test_single_point_one_rotation():
    p = np.array([math.cos(0.9), math.sin(0.9), 0.0])
    res = minrot(p[None, :], CONE, 0.1, start=(1.0, 0.0, 0.0))
    assert res.status is Status.COVERED and res.iterations == 1
    assert res.trace.column("theta")[0] == pytest.approx(0.5)


def test_all_inside_no_iterations():
    pts = np.array([[1.0, 0.1, 0.0], [2.0, -0.2, 0.1]])
    res = minrot(pts, CONE, 0.1, start=(1.0, 0.0, 0.0))
    assert res.status is Status.COVERED and res.iterations == 0


@pytest.mark.parametrize("seed", range(3))
def test_planted_cone(seed):
    inst, half = _cone_instance(seed)
    eps = 0.1
    res = minrot(inst.points, CONE, eps, half=half)
    assert res.status is Status.COVERED and res.iterations <= 101
    assert angle_between(res.axis, np.asarray(inst.planted["axis"])) <= 0.2
    assert res.trace.columns == ROTATION_COLUMNS


def test_spherical_potential_decrease():
    inst, half = _cone_instance(4, dim=6)
    res = minrot(inst.points, CONE, 0.05, half=half)
    u_star = np.asarray(inst.planted["axis"])
    d2 = [float(np.sum((u - u_star) ** 2)) for u in res.path]
    for k, v in enumerate(res.trace.column("violation")):
        assert d2[k + 1] <= d2[k] - v * v + 1e-6


def test_halfspace_violation_rejected():
    inst, half = _cone_instance(0)
    bad = np.vstack([inst.points, -np.asarray(inst.planted["axis"])])
    with pytest.raises(ValueError):
        minrot(bad, CONE, 0.1, half=half)


def test_minrot_rejects_symmetric_profile():
    with pytest.raises(ValueError):
        minrot(np.eye(3), AngularProfile("full-cylinder", (1.0,)), 0.1)


def test_minrot_infeasible_point():
    prof = AngularProfile("half-ellipsoid", (1.0, 0.5))
    res = minrot(np.array([[0.5, 0.0], [0.0, 3.0]]), prof, 0.1, start=(1.0, 0.0))
    assert res.status is Status.INFEASIBLE


def test_minrot_cap():
    inst, half = _cone_instance(1)
    res = minrot(inst.points, AngularProfile("cone", (0.1,)), 0.01, half=half, iter_cap=3)
    assert res.status is Status.CAP_EXCEEDED and res.iterations == 3


def test_axis_state_requires_unit():
    with pytest.raises(ValueError):
        AxisState(np.array([2.0, 0.0]))


def test_fullrot_one_guess_covers_far_point():
    prof = AngularProfile("double-cone", (0.3,))
    p = np.array([math.cos(2.5), math.sin(2.5)])
    for guess, theta in ((0, 2.5 - 0.3), (1, -(math.pi - 2.5 - 0.3))):
        res = fullrot(
            p[None, :], prof, 0.05, start=(1.0, 0.0), strategy="oracle-guided", hidden_axis=(1.0, 0.0) if guess else p
        )
        assert res.status is Status.COVERED and res.iterations == 1
        assert res.guesses == [guess]
        assert res.trace.column("theta")[0] == pytest.approx(theta)


def _cylinder(seed, dim=5):
    inst = instances.cylinder(300, dim, seed, through_origin=True)
    return inst, AngularProfile("full-cylinder", tuple(inst.planted["profile"]["params"]))


@pytest.mark.parametrize("seed", range(3))
def test_fullrot_oracle_guided_monotone(seed):
    inst, prof = _cylinder(seed)
    hidden = np.asarray(inst.planted["axis"])
    res = fullrot(inst.points, prof, 0.3, strategy="oracle-guided", hidden_axis=hidden)
    assert res.status is Status.COVERED and res.iterations <= math.ceil(1 / 0.09) + 1
    line = [min(np.linalg.norm(u - hidden), np.linalg.norm(u + hidden)) for u in res.path]
    assert all(b <= a + 1e-9 for a, b in zip(line, line[1:]))


def test_fullrot_randomized_seed3():
    inst, prof = _cylinder(0)
    res = fullrot(inst.points, prof, 0.3, strategy="randomized", restarts=64, seed=3)
    assert res.status is Status.COVERED
    rho = np.linalg.norm(inst.points, axis=1).max()
    assert normalized_violations(prof, inst.points, res.axis, rho).max() <= 0.3


def test_fullrot_exhaustive_budget_is_honest():
    inst, prof = _cylinder(1)
    tiny = AngularProfile("full-cylinder", (0.2,))
    res = fullrot(inst.points, tiny, 0.3, strategy="exhaustive", budget=40)
    assert res.status is Status.CAP_EXCEEDED and res.nodes == 40


def test_fullrot_exhaustive_smoke():
    inst, prof = _cylinder(2)
    res = fullrot(inst.points, prof, 0.3, strategy="exhaustive", budget=5000)
    assert res.status in (Status.COVERED, Status.CAP_EXCEEDED)
    if res.status is Status.COVERED:
        rho = np.linalg.norm(inst.points, axis=1).max()
        assert normalized_violations(prof, inst.points, res.axis, rho).max() <= 0.3
    else:
        assert res.nodes == 5000


def test_fullrot_validation():
    inst, prof = _cylinder(0)
    with pytest.raises(ValueError):
        fullrot(inst.points, prof, 0.3, strategy="oracle-guided")
    with pytest.raises(ValueError):
        fullrot(inst.points, prof, 0.3, strategy="guess")
    with pytest.raises(ValueError):
        fullrot(inst.points, CONE, 0.3)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_randomized_never_falsely_covered(seed):
    inst, prof = _cylinder(seed % 7, dim=4)
    res = fullrot(inst.points, prof, 0.3, strategy="randomized", restarts=4, seed=seed)
    rho = np.linalg.norm(inst.points, axis=1).max()
    actual = normalized_violations(prof, inst.points, res.axis, rho).max()
    if res.status is Status.COVERED:
        assert actual <= 0.3
    else:
        assert res.status is Status.CAP_EXCEEDED


def test_minrot_agrees_with_rotation_grid():
    inst = instances.cone(200, 3, seed=5)
    prof = AngularProfile("cone", (0.4,))
    grid = rotation_grid_oracle(inst.points, prof, k=20_000)
    res = minrot(inst.points, prof, 0.05)
    assert grid.max_violation <= 0.05
    assert res.max_violation <= 0.05
