"""Covering by rotating an axis-symmetric shape about the origin.

The axis is repeatedly turned by the smallest angle that brings the
worst uncovered point onto the surface. For half shapes confined to a
half-space there is a single such rotation (``minrot``). Origin-symmetric
shapes (``fullrot``) offer two, one per end of the axis, and the solver
has to guess.

Violations are measured as the chord a point still has to travel,
``2 rho sin((phi - alpha)/2)``, divided by the largest point norm so that
``eps`` is relative to a unit-radius instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import angles_to_axis, as_cloud, as_vector, unit
from .shapes import AngularProfile, angular_violations, smallest_touching_rotation
from .trace import ROTATION_COLUMNS, ConvergenceTrace, Status

DEFAULT_BUDGET = 100_000


@dataclass
class AxisState:
    direction: np.ndarray

    def __post_init__(self) -> None:
        d = as_vector(self.direction)
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError("axis direction must be unit length")
        self.direction = d


@dataclass
class HalfSpaceConstraint:
    """Admissible region ``normal . x >= 0``."""

    normal: np.ndarray

    def __post_init__(self) -> None:
        self.normal = unit(as_vector(self.normal))

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(points)
        scale = max(1.0, float(np.abs(pts).max()))
        return pts @ self.normal >= -tol * scale


@dataclass
class RotationResult:
    status: Status
    axis: np.ndarray
    trace: ConvergenceTrace
    visited: list[int]
    max_violation: float
    path: list[np.ndarray] = field(default_factory=list)
    guesses: list[int] = field(default_factory=list)
    nodes: int = 0
    restarts: int = 0
    halfspace_exits: int = 0

    @property
    def iterations(self) -> int:
        return len(self.visited)


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def normalized_violations(profile: AngularProfile, cloud: np.ndarray, axis: np.ndarray, rho_max: float) -> np.ndarray:
    rho, phi = angles_to_axis(cloud, axis)
    return angular_violations(profile, rho, phi) / rho_max


def farthest_point_axis(cloud: np.ndarray) -> np.ndarray:
    """Start axis through the point farthest from the rotation point."""
    norms = np.linalg.norm(cloud, axis=1)
    return cloud[int(np.argmax(norms))] / norms.max()


def _prepare(cloud, eps, start):
    cloud = as_cloud(cloud)
    _check_eps(eps)
    rho_max = float(np.linalg.norm(cloud, axis=1).max())
    if start is None:
        axis = farthest_point_axis(cloud) if rho_max > 0 else np.eye(cloud.shape[1])[0]
    else:
        axis = unit(as_vector(start, cloud.shape[1]))
    return cloud, rho_max, axis


def _row(k, i, theta, guess, v):
    return {"iteration": k, "violator_index": i, "theta": float(theta), "guess": guess, "violation": float(v)}


def _finish(status, axis, rows, visited, viol, path, guesses=(), nodes=0, restarts=0, exits=0):
    trace = ConvergenceTrace(ROTATION_COLUMNS, status=status)
    for r in rows:
        trace.add(**r)
    return RotationResult(status, axis, trace, list(visited), float(viol), list(path), list(guesses), nodes, restarts, exits)


def minrot(
    cloud,
    profile: AngularProfile,
    eps: float,
    half: HalfSpaceConstraint | None = None,
    start=None,
    iter_cap: int | None = None,
) -> RotationResult:
    """Rotate a half shape (half-cylinder, cone, half-ellipsoid) until it covers the cloud.

    The default start axis points at the point farthest from the origin.
    ``halfspace_exits`` on the result counts iterates whose axis left the
    half-space; nothing forces it to stay, so it is reported, not clamped.
    """
    if profile.symmetric:
        raise ValueError(f"minrot needs a half profile, got symmetric {profile.kind!r}")
    cloud, rho_max, axis = _prepare(cloud, eps, start)
    if half is not None and not half.contains(cloud).all():
        raise ValueError("input points violate the half-space constraint")
    if iter_cap is None:
        iter_cap = math.ceil(1.0 / eps**2) + 1
    path, rows, visited = [axis], [], []
    exits = 0
    if rho_max == 0.0:
        return _finish(Status.COVERED, axis, rows, visited, 0.0, path)
    while True:
        v = normalized_violations(profile, cloud, axis, rho_max)
        i = int(np.argmax(v))
        if math.isinf(v[i]):
            return _finish(Status.INFEASIBLE, axis, rows, visited, v[i], path, exits=exits)
        if v[i] <= eps:
            return _finish(Status.COVERED, axis, rows, visited, v[i], path, exits=exits)
        if len(visited) == iter_cap:
            return _finish(Status.CAP_EXCEEDED, axis, rows, visited, v[i], path, exits=exits)
        theta, axis = smallest_touching_rotation(profile, axis, cloud[i])[0]
        visited.append(i)
        rows.append(_row(len(visited), i, theta, 0, v[i]))
        path.append(axis)
        if half is not None and float(axis @ half.normal) < -1e-12:
            exits += 1


def _line_distance(a: np.ndarray, hidden: np.ndarray) -> float:
    return min(float(np.linalg.norm(a - hidden)), float(np.linalg.norm(a + hidden)))


def fullrot(
    cloud,
    profile: AngularProfile,
    eps: float,
    start=None,
    strategy: str = "randomized",
    restarts: int = 64,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    hidden_axis=None,
    iter_cap: int | None = None,
) -> RotationResult:
    """Rotate an origin-symmetric shape (full cylinder, ellipsoid, double cone).

    Each move guesses which end of the axis should swing onto the violator
    (guess 0 turns the ``+axis`` end toward the point, guess 1 turns away
    so the ``-axis`` end catches it). Strategies: ``exhaustive`` walks
    guess strings depth first within ``budget`` nodes; ``randomized``
    flips a fair coin per move with restart ``k`` seeded by ``(seed, k)``;
    ``oracle-guided`` keeps the candidate closer (as a line) to a known
    ``hidden_axis`` and exists for testing.
    """
    if not profile.symmetric:
        raise ValueError(f"fullrot needs a symmetric profile, got {profile.kind!r}")
    cloud, rho_max, axis0 = _prepare(cloud, eps, start)
    if iter_cap is None:
        iter_cap = math.ceil(1.0 / eps**2) + 1
    if rho_max == 0.0:
        return _finish(Status.COVERED, axis0, [], [], 0.0, [axis0])
    best: dict = {"viol": math.inf}

    def evaluate(axis):
        v = normalized_violations(profile, cloud, axis, rho_max)
        i = int(np.argmax(v))
        return i, float(v[i])

    def remember(axis, rows, visited, viol, path, guesses):
        if viol < best["viol"]:
            best.update(viol=viol, axis=axis, rows=list(rows), visited=list(visited), path=list(path), guesses=list(guesses))

    def from_best(status, nodes, restarts_used=0):
        return _finish(status, best["axis"], best["rows"], best["visited"], best["viol"], best["path"], best["guesses"], nodes, restarts_used)

    if strategy in ("oracle-guided", "oracle_guided"):
        if hidden_axis is None:
            raise ValueError("oracle-guided strategy needs the hidden axis")
        hidden = unit(as_vector(hidden_axis, cloud.shape[1]))
        axis, rows, visited, path, guesses = axis0, [], [], [axis0], []
        while True:
            i, viol = evaluate(axis)
            if math.isinf(viol):
                return _finish(Status.INFEASIBLE, axis, rows, visited, viol, path, guesses, len(path))
            if viol <= eps:
                return _finish(Status.COVERED, axis, rows, visited, viol, path, guesses, len(path))
            if len(visited) == iter_cap:
                return _finish(Status.CAP_EXCEEDED, axis, rows, visited, viol, path, guesses, len(path))
            cands = smallest_touching_rotation(profile, axis, cloud[i])
            dists = [_line_distance(c[1], hidden) for c in cands]
            g = 1 if dists[1] < dists[0] else 0
            theta, axis = cands[g]
            visited.append(i)
            guesses.append(g)
            rows.append(_row(len(visited), i, theta, g, viol))
            path.append(axis)

    if strategy == "exhaustive":
        stack = [(axis0, [], [], [axis0], [])]
        nodes = 0
        while stack and nodes < budget:
            axis, rows, visited, path, guesses = stack.pop()
            nodes += 1
            i, viol = evaluate(axis)
            remember(axis, rows, visited, viol, path, guesses)
            if math.isinf(viol):
                return _finish(Status.INFEASIBLE, axis, rows, visited, viol, path, guesses, nodes)
            if viol <= eps:
                return _finish(Status.COVERED, axis, rows, visited, viol, path, guesses, nodes)
            if len(visited) == iter_cap:
                continue
            cands = smallest_touching_rotation(profile, axis, cloud[i])
            for g in reversed(range(len(cands))):
                theta, nxt = cands[g]
                row = _row(len(visited) + 1, i, theta, g, viol)
                stack.append((nxt, rows + [row], visited + [i], path + [nxt], guesses + [g]))
        return from_best(Status.CAP_EXCEEDED, nodes)

    if strategy == "randomized":
        nodes = 0
        for k in range(restarts):
            rng = np.random.default_rng([seed, k])
            axis, rows, visited, path, guesses = axis0, [], [], [axis0], []
            while True:
                nodes += 1
                i, viol = evaluate(axis)
                remember(axis, rows, visited, viol, path, guesses)
                if math.isinf(viol):
                    return _finish(Status.INFEASIBLE, axis, rows, visited, viol, path, guesses, nodes, k + 1)
                if viol <= eps:
                    return _finish(Status.COVERED, axis, rows, visited, viol, path, guesses, nodes, k + 1)
                if len(visited) == iter_cap:
                    break
                g = int(rng.integers(2))
                theta, axis = smallest_touching_rotation(profile, axis, cloud[i])[g]
                visited.append(i)
                guesses.append(g)
                rows.append(_row(len(visited), i, theta, g, viol))
                path.append(axis)
        return from_best(Status.CAP_EXCEEDED, nodes, restarts)

    raise ValueError(f"unknown strategy {strategy!r}")
