"""Brute-force reference solvers for checking the approximate ones.

Nothing here calls solver code: hulls, circles, violations and angular
radii are computed afresh, so agreement between a solver and its oracle
is evidence rather than a tautology. Only the plain ``BallState``
container is shared.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .meb import BallState

MAX_GRID_CELLS = 10**8


def _points(cloud, dim: int | None = None) -> np.ndarray:
    pts = np.asarray(cloud, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("expected a non-empty (n, d) array of points")
    if dim is not None and pts.shape[1] != dim:
        raise ValueError(f"this oracle needs {dim}-D points, got {pts.shape[1]}-D")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    return pts


# --------------------------------------------------------------------------
# exact minimum enclosing circle


def _hull_2d(pts: np.ndarray) -> np.ndarray:
    """Convex hull vertices (monotone chain); degenerate inputs keep their extremes."""
    uniq = np.unique(pts, axis=0)
    if uniq.shape[0] <= 2:
        return uniq

    def half(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) > 0:
                    break
                out.pop()
            out.append(p)
        return out

    lower, upper = half(uniq), half(uniq[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _candidate_circles(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Circles on every pair (as diameter) and every non-collinear triple of ``h``."""
    m = h.shape[0]
    i, j = np.triu_indices(m, 1)
    centers = [(h[i] + h[j]) / 2]
    radii = [np.linalg.norm(h[i] - h[j], axis=1) / 2]
    if m >= 3:
        tri = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(m), 3)), dtype=np.int64)
        a_idx, b_idx, c_idx = tri.reshape(-1, 3).T
        a, b, c = h[a_idx], h[b_idx], h[c_idx]
        bx, by = b[:, 0] - a[:, 0], b[:, 1] - a[:, 1]
        cx, cy = c[:, 0] - a[:, 0], c[:, 1] - a[:, 1]
        det = 2.0 * (bx * cy - by * cx)
        scale = np.maximum(np.abs(bx) + np.abs(by), np.abs(cx) + np.abs(cy)) ** 2
        ok = np.abs(det) > 1e-12 * scale
        b2, c2 = bx**2 + by**2, cx**2 + cy**2
        ux = (cy * b2 - by * c2)[ok] / det[ok]
        uy = (bx * c2 - cx * b2)[ok] / det[ok]
        centers.append(a[ok] + np.column_stack([ux, uy]))
        radii.append(np.hypot(ux, uy))
    return np.vstack(centers), np.concatenate(radii)


def exact_meb_2d(cloud) -> BallState:
    """Exact minimum enclosing circle of 2-D points.

    Every circle through two hull vertices (as a diameter) or three hull
    vertices is a candidate; candidates are scanned in order of radius and
    the first one containing every hull vertex is returned. Restricting to
    hull vertices is exact because a circle contains the cloud iff it
    contains its hull.
    """
    pts = _points(cloud, 2)
    h = _hull_2d(pts)
    if h.shape[0] == 1:
        return BallState(h[0].copy(), 0.0)
    centers, radii = _candidate_circles(h)
    order = np.argsort(radii, kind="stable")
    extent = float(np.abs(h).max()) + float(radii.max())
    slack = 1e-12 * max(1.0, extent)
    for s in range(0, order.shape[0], 512):
        idx = order[s : s + 512]
        d = np.linalg.norm(h[None, :, :] - centers[idx, None, :], axis=2)
        covers = (d <= radii[idx, None] + slack).all(axis=1)
        if covers.any():
            k = idx[int(np.argmax(covers))]
            return BallState(centers[k].copy(), float(radii[k]))
    raise RuntimeError("no candidate circle covers the points")


# --------------------------------------------------------------------------
# translation grid


@dataclass
class GridOracleResult:
    translation: np.ndarray
    max_violation: float
    cells: int


def _box_violation(pts: np.ndarray, t: np.ndarray, half: np.ndarray) -> np.ndarray:
    """Max over points of the distance to the box, for every translation row of ``t``."""
    excess = np.maximum(np.abs(pts[None, :, :] - t[:, None, :]) - half, 0.0)
    return np.sqrt((excess**2).sum(axis=2)).max(axis=1)


def _ball_violation(pts: np.ndarray, t: np.ndarray, radius: float) -> np.ndarray:
    d = np.sqrt(((pts[None, :, :] - t[:, None, :]) ** 2).sum(axis=2))
    return np.maximum(d - radius, 0.0).max(axis=1)


def grid_translation_oracle(cloud, shape, scale: float, step: float) -> GridOracleResult:
    """Best translation of ``shape`` at ``scale`` over a grid of spacing ``step``.

    Grid nodes are integer multiples of ``step`` inside the bounding box
    of the cloud grown by the circumradius of the scaled shape. Balls and
    boxes only, in dimension at most 3. Ties go to the first node in
    lexicographic order.
    """
    pts = _points(cloud)
    d = pts.shape[1]
    if d > 3:
        raise ValueError("grid oracle supports dimension at most 3")
    if not step > 0 or not scale > 0:
        raise ValueError("step and scale must be positive")
    params = np.asarray(shape.params, dtype=float)
    if shape.kind == "ball":
        reach = scale * float(params[0])
        evaluate = lambda t: _ball_violation(pts, t, reach)  # noqa: E731
    elif shape.kind == "box":
        half = scale * np.broadcast_to(params, (d,))
        reach = float(np.linalg.norm(half))
        evaluate = lambda t: _box_violation(pts, t, half)  # noqa: E731
    else:
        raise ValueError(f"grid oracle does not support shape kind {shape.kind!r}")
    lo = np.ceil((pts.min(axis=0) - reach) / step).astype(np.int64)
    hi = np.floor((pts.max(axis=0) + reach) / step).astype(np.int64)
    counts = hi - lo + 1
    cells = int(np.prod(counts.astype(float)))
    if cells > MAX_GRID_CELLS:
        raise ValueError(f"grid has {cells} cells, more than {MAX_GRID_CELLS}")
    chunk = max(1, 2_000_000 // max(1, pts.shape[0]))
    best_v, best_t = math.inf, None
    for s in range(0, cells, chunk):
        flat = np.arange(s, min(cells, s + chunk))
        idx = np.column_stack(np.unravel_index(flat, tuple(counts)))
        t = (lo + idx) * step
        v = evaluate(t)
        k = int(np.argmin(v))
        if v[k] < best_v:
            best_v, best_t = float(v[k]), t[k].copy()
    return GridOracleResult(best_t, best_v, cells)


# --------------------------------------------------------------------------
# direction grids on the 2-sphere


def fibonacci_directions(k: int) -> np.ndarray:
    """``k`` quasi-uniform unit vectors on the sphere (golden-angle spiral)."""
    if k < 1:
        raise ValueError("need at least one direction")
    i = np.arange(k) + 0.5
    z = 1.0 - 2.0 * i / k
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    theta = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])


def _plane_basis(u: np.ndarray) -> np.ndarray:
    """Two orthonormal rows spanning the plane orthogonal to unit ``u``."""
    helper = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(u, helper)
    e1 /= np.linalg.norm(e1)
    return np.vstack([e1, np.cross(u, e1)])


@dataclass
class DirectionGridResult:
    axis: np.ndarray
    radius: float
    center: np.ndarray
    evaluated: int


def direction_grid_cylinder(cloud, k: int = 100_000, lower_bound_dirs: int = 8, chunk: int = 2048) -> DirectionGridResult:
    """Minimum-radius cylinder over ``k`` Fibonacci axis directions.

    For a fixed direction the best radius is the exact minimum enclosing
    circle of the projection onto the orthogonal plane. Directions are
    visited in increasing order of a cheap lower bound (half the widest
    projected width over ``lower_bound_dirs`` in-plane directions) and the
    scan stops once the bound reaches the best radius found. ``center`` is
    a point on the returned axis.
    """
    pts = _points(cloud, 3)
    dirs = fibonacci_directions(k)
    angles = math.pi * np.arange(lower_bound_dirs) / lower_bound_dirs
    bounds = np.empty(k)
    for s in range(0, k, chunk):
        u = dirs[s : s + chunk]
        helper = np.where(np.abs(u[:, :1]) < 0.9, np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 1.0, 0.0]]))
        e1 = np.cross(u, helper)
        e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
        e2 = np.cross(u, e1)
        best = np.zeros(u.shape[0])
        for a in angles:
            v = math.cos(a) * e1 + math.sin(a) * e2
            proj = v @ pts.T
            best = np.maximum(best, (proj.max(axis=1) - proj.min(axis=1)) / 2)
        bounds[s : s + chunk] = best
    order = np.argsort(bounds, kind="stable")
    best_r, best_axis, best_c, evaluated = math.inf, dirs[0], pts[0], 0
    for idx in order:
        if bounds[idx] >= best_r:
            break
        u = dirs[idx]
        basis = _plane_basis(u)
        circle = exact_meb_2d(pts @ basis.T)
        evaluated += 1
        if circle.radius < best_r:
            best_r, best_axis, best_c = circle.radius, u, circle.center @ basis
    return DirectionGridResult(best_axis.copy(), float(best_r), np.asarray(best_c, dtype=float), evaluated)


# --------------------------------------------------------------------------
# rotation grid


def _inside(kind: str, params, axial: np.ndarray, radial: np.ndarray) -> np.ndarray:
    """Membership of points given by axial and radial coordinates about the axis."""
    if kind == "half-cylinder":
        return (axial >= 0) & (radial <= params[0])
    if kind == "full-cylinder":
        return radial <= params[0]
    if kind == "cone":
        return (axial >= 0) & (radial <= math.tan(params[0]) * axial + 1e-15)
    if kind == "double-cone":
        return radial <= math.tan(params[0]) * np.abs(axial) + 1e-15
    a, b = params
    inside = (axial / a) ** 2 + (radial / b) ** 2 <= 1.0
    return inside & (axial >= 0) if kind == "half-ellipsoid" else inside


def _angular_radius(kind: str, params, rho: np.ndarray, upper: float) -> np.ndarray:
    """Largest angle in ``[0, upper]`` at which distance ``rho`` is inside (bisection).

    NaN where even the axis direction is outside.
    """
    lo = np.zeros_like(rho)
    hi = np.full_like(rho, upper)
    ok0 = _inside(kind, params, rho, np.zeros_like(rho))
    full = _inside(kind, params, rho * math.cos(upper), rho * math.sin(upper))
    for _ in range(60):
        mid = (lo + hi) / 2
        inside = _inside(kind, params, rho * np.cos(mid), rho * np.sin(mid))
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    alpha = np.where(full, upper, lo)
    return np.where(ok0, alpha, math.nan)


@dataclass
class RotationGridResult:
    axis: np.ndarray
    max_violation: float


def rotation_grid_oracle(cloud, profile, k: int = 20_000) -> RotationGridResult:
    """Best axis among ``k`` Fibonacci directions for a shape rotating about the origin.

    The violation of a point is the chord ``2 rho sin((phi - alpha)/2)`` it
    would have to rotate through to reach the surface, divided by the
    largest point norm. The angular radius ``alpha`` comes from bisection
    on the shape's membership test. Symmetric shapes measure ``phi`` to
    the nearer end of the axis; points no rotation can reach count as
    infinite.
    """
    pts = _points(cloud, 3)
    kind, params = profile.kind, tuple(profile.params)
    symmetric = kind in ("full-cylinder", "full-ellipsoid", "double-cone")
    rho = np.linalg.norm(pts, axis=1)
    rho_max = float(rho.max())
    if rho_max == 0.0:
        return RotationGridResult(np.array([0.0, 0.0, 1.0]), 0.0)
    upper = math.pi / 2 if symmetric else math.pi
    pos = rho > 0
    alpha = np.full(rho.shape, math.pi)
    alpha[pos] = _angular_radius(kind, params, rho[pos], upper)
    if symmetric:
        alpha = np.where(alpha >= math.pi / 2, math.pi, alpha)
    dirs = fibonacci_directions(k)
    best_v, best_u = math.inf, dirs[0]
    safe = np.where(pos, rho, 1.0)
    for s in range(0, k, 4096):
        u = dirs[s : s + 4096]
        cos = np.clip((u @ pts.T) / safe, -1.0, 1.0)
        phi = np.arccos(cos)
        if symmetric:
            phi = np.minimum(phi, math.pi - phi)
        excess = np.maximum(phi - alpha, 0.0)
        v = np.where(pos, 2.0 * rho * np.sin(excess / 2.0), 0.0)
        v = np.where(np.isnan(alpha), math.inf, v).max(axis=1) / rho_max
        j = int(np.argmin(v))
        if v[j] < best_v:
            best_v, best_u = float(v[j]), u[j]
    return RotationGridResult(best_u.copy(), best_v)
