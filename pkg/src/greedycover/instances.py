"""Synthetic point clouds whose optimal enclosing shape is known.

Every generator samples points inside a planted shape and always adds
boundary points that pin the shape down (an orthonormal frame on a
sphere, opposite faces of a box, rings at both ends of a cylinder, ...),
so the planted shape is optimal. The planted optimum is returned as a
JSON-ready dict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

GENERATOR_KINDS = ("sphere-shell", "ball-interior", "box", "ellipsoid", "cone", "cylinder", "dumbbell-union")


@dataclass
class Instance:
    points: np.ndarray
    kind: str
    seed: int | None
    planted: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_unit(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _uniform_sphere(n: int, dim: int, rng) -> np.ndarray:
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _uniform_ball(n: int, dim: int, rng) -> np.ndarray:
    return _uniform_sphere(n, dim, rng) * rng.random(n)[:, None] ** (1.0 / dim)


def _orthonormal_complement(a: np.ndarray) -> np.ndarray:
    """Rows form an orthonormal basis of the hyperplane orthogonal to unit ``a``."""
    q, _ = np.linalg.qr(np.column_stack([a, np.eye(a.shape[0])]))
    return q[:, 1:].T


def _frame(dim: int, rng, count: int) -> np.ndarray:
    """Up to ``count`` points of a random signed orthonormal frame, antipodal pairs first."""
    q = random_rotation(dim, rng)
    pairs = np.empty((2 * dim, dim))
    pairs[0::2] = q
    pairs[1::2] = -q
    return pairs[:count]


def _assemble(required: np.ndarray, filler: np.ndarray, n: int, rng) -> np.ndarray:
    pts = np.vstack([required[:n], filler[: max(0, n - required.shape[0])]])
    return pts[rng.permutation(pts.shape[0])]


def _check(n: int, dim: int) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    if dim < 2:
        raise ValueError("dim must be at least 2")


def sphere_shell(n: int, dim: int, seed: int | None = None, radius: float = 1.0) -> Instance:
    """Points on a sphere; a signed orthonormal frame makes it the MEB."""
    _check(n, dim)
    rng = np.random.default_rng(seed)
    center = rng.uniform(-1.0, 1.0, dim)
    if n == 1:
        return Instance(center[None, :], "sphere-shell", seed, {"center": center.tolist(), "radius": 0.0})
    k = min(n, 2 * dim)
    k -= k % 2
    unit_pts = _assemble(_frame(dim, rng, k), _uniform_sphere(n - k, dim, rng), n, rng)
    pts = center + radius * unit_pts
    return Instance(pts, "sphere-shell", seed, {"center": center.tolist(), "radius": float(radius)})


def ball_interior(n: int, dim: int, seed: int | None = None, radius: float = 1.0) -> Instance:
    _check(n, dim)
    rng = np.random.default_rng(seed)
    center = rng.uniform(-1.0, 1.0, dim)
    if n == 1:
        return Instance(center[None, :], "ball-interior", seed, {"center": center.tolist(), "radius": 0.0})
    k = min(n, 2 * dim)
    k -= k % 2
    pts = center + radius * _assemble(_frame(dim, rng, k), _uniform_ball(n - k, dim, rng), n, rng)
    return Instance(pts, "ball-interior", seed, {"center": center.tolist(), "radius": float(radius)})


def box(n: int, dim: int, seed: int | None = None, half_widths=None) -> Instance:
    """Uniform points in an axis-aligned box.

    An opposite-corner pair fixes the diameter and one point on every face
    pins both the translation and the scale.
    """
    _check(n, dim)
    rng = np.random.default_rng(seed)
    h = rng.uniform(0.5, 1.5, dim) if half_widths is None else np.broadcast_to(np.asarray(half_widths, float), (dim,)).copy()
    t = rng.uniform(-1.0, 1.0, dim)
    corner = h * rng.choice([-1.0, 1.0], dim)
    faces = []
    for i in range(dim):
        for sign in (1.0, -1.0):
            f = rng.uniform(-h, h)
            f[i] = sign * h[i]
            faces.append(f)
    required = np.vstack([corner, -corner, *faces])
    local = _assemble(required, rng.uniform(-h, h, (max(0, n - required.shape[0]), dim)), n, rng)
    planted = {
        "translation": t.tolist(),
        "scale": 1.0,
        "shape": {"kind": "box", "params": h.tolist()},
    }
    return Instance(t + local, "box", seed, planted)


def ellipsoid(n: int, dim: int, seed: int | None = None, semi_axes=None) -> Instance:
    _check(n, dim)
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.5, 1.5, dim) if semi_axes is None else np.broadcast_to(np.asarray(semi_axes, float), (dim,)).copy()
    t = rng.uniform(-1.0, 1.0, dim)
    poles = np.vstack([np.diag(a), -np.diag(a)])
    local = _assemble(poles, a * _uniform_ball(max(0, n - poles.shape[0]), dim, rng), n, rng)
    planted = {
        "translation": t.tolist(),
        "scale": 1.0,
        "shape": {"kind": "ellipsoid", "params": a.tolist()},
    }
    return Instance(t + local, "ellipsoid", seed, planted)


def cone(n: int, dim: int, seed: int | None = None, half_angle: float = 0.4) -> Instance:
    """Points within ``half_angle`` of a hidden axis through the origin, norms at most 1.

    Points exactly on the cone surface in every signed direction of the
    orthogonal complement pin the axis; their norms are random so the
    farthest point is not a surface point.
    """
    _check(n, dim)
    rng = np.random.default_rng(seed)
    axis = random_unit(dim, rng)
    comp = _orthonormal_complement(axis)
    ring_dirs = np.vstack([comp, -comp])
    ring_norms = rng.uniform(0.5, 1.0, ring_dirs.shape[0])[:, None]
    ring = ring_norms * (math.cos(half_angle) * axis + math.sin(half_angle) * ring_dirs)
    m = max(0, n - ring.shape[0])
    w = rng.standard_normal((m, dim - 1)) @ comp
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    phi = half_angle * rng.random(m) ** (1.0 / max(1, dim - 1))
    rho = rng.uniform(0.05, 1.0, m)
    inner = rho[:, None] * (np.cos(phi)[:, None] * axis + np.sin(phi)[:, None] * w)
    pts = _assemble(ring, inner, n, rng)
    planted = {
        "axis": axis.tolist(),
        "profile": {"kind": "cone", "params": [float(half_angle)]},
        "halfspace_normal": axis.tolist(),
    }
    return Instance(pts, "cone", seed, planted)


def _cylinder_ring(dim: int, comp: np.ndarray, ring_points: int) -> np.ndarray:
    if dim == 3:
        ang = 2 * math.pi * np.arange(ring_points) / ring_points
        return np.cos(ang)[:, None] * comp[0] + np.sin(ang)[:, None] * comp[1]
    return np.vstack([comp, -comp])


def cylinder(
    n: int,
    dim: int,
    seed: int | None = None,
    radius: float = 1.0,
    half_length: float = 1.0,
    through_origin: bool = False,
    ring_points: int = 32,
) -> Instance:
    """Points in a finite cylinder around a hidden axis.

    Full rings of surface points at both ends force the optimal radius
    and make the anchors ``U``, ``V`` (extreme projections onto the axis)
    known exactly. With ``through_origin`` the axis passes through the
    origin and the points straddle it, as the rotation solvers expect.
    """
    _check(n, dim)
    rng = np.random.default_rng(seed)
    axis = random_unit(dim, rng)
    anchor = np.zeros(dim) if through_origin else rng.uniform(-1.0, 1.0, dim)
    comp = _orthonormal_complement(axis)
    ring = radius * _cylinder_ring(dim, comp, ring_points)
    ends = np.vstack([half_length * axis + ring, -half_length * axis + ring])
    m = max(0, n - ends.shape[0])
    t = rng.uniform(-half_length, half_length, m)
    radial = radius * _uniform_ball(m, dim - 1, rng) @ comp
    local = _assemble(ends, t[:, None] * axis + radial, n, rng)
    planted = {
        "axis_point": anchor.tolist(),
        "axis": axis.tolist(),
        "radius": float(radius),
        "half_length": float(half_length),
        "U": (anchor - half_length * axis).tolist(),
        "V": (anchor + half_length * axis).tolist(),
        "profile": {"kind": "full-cylinder", "params": [float(radius)]},
    }
    return Instance(anchor + local, "cylinder", seed, planted)


def dumbbell_union(n: int, dim: int, seed: int | None = None, offset: float = 1.0, radius: float = 1.0) -> Instance:
    """Two balls at ``+-offset`` along the first axis, moved by a hidden translation."""
    _check(n, dim)
    rng = np.random.default_rng(seed)
    t = rng.uniform(-1.0, 1.0, dim)
    e1 = np.zeros(dim)
    e1[0] = 1.0
    centers = (offset * e1, -offset * e1)
    required = [offset * e1 + radius * e1, -offset * e1 - radius * e1]
    for c in centers:
        for j in range(1, dim):
            ej = np.zeros(dim)
            ej[j] = radius
            required += [c + ej, c - ej]
    m = max(0, n - len(required))
    side = np.where(rng.random(m) < 0.5, 1.0, -1.0)
    filler = side[:, None] * offset * e1 + radius * _uniform_ball(m, dim, rng)
    local = _assemble(np.vstack(required), filler, n, rng)
    parts = [
        {"kind": "ball", "params": [float(radius)], "offset": c.tolist()} for c in centers
    ]
    planted = {"translation": t.tolist(), "scale": 1.0, "parts": parts}
    return Instance(t + local, "dumbbell-union", seed, planted)


def generate(kind: str, n: int, dim: int, seed: int | None = None, **params) -> Instance:
    gens = {
        "sphere-shell": sphere_shell,
        "ball-interior": ball_interior,
        "box": box,
        "ellipsoid": ellipsoid,
        "cone": cone,
        "cylinder": cylinder,
        "dumbbell-union": dumbbell_union,
    }
    if kind not in gens:
        raise ValueError(f"unknown generator kind {kind!r}; expected one of {GENERATOR_KINDS}")
    try:
        return gens[kind](n, dim, seed, **params)
    except TypeError as exc:
        raise ValueError(f"invalid parameters for {kind}: {exc}") from None
