"""Shape oracles.

Translatable shapes expose a Euclidean projection (closest point) at a
pose ``(translation, scale)``. Axis-symmetric shapes used by the rotation
solvers are described instead by an angular profile: for a sphere of
radius ``rho`` about the rotation point, the largest polar angle from the
axis that the shape still covers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import ClassVar, NamedTuple

import numpy as np

from .geom import TOL, DimensionError, as_vector, orthogonal_direction, rotate_in_plane

DEFAULT_TOL_PROJ = 1e-9


class ProjectionError(RuntimeError):
    """The iterative hull projection did not converge within its cap."""


class UncoverableError(ValueError):
    """A point cannot be covered by any rotation of the shape at this scale."""


# --------------------------------------------------------------------------
# translatable convex shapes


@dataclass(frozen=True, eq=False, kw_only=True)
class TranslatableShape:
    """Convex shape with a pose: ``translation + scale * K`` for a fixed body ``K``.

    ``K`` is given in local coordinates around a reference point at the
    local origin; subclasses define it through their intrinsic parameters.
    """

    translation: np.ndarray | None = None
    scale: float = 1.0

    kind: ClassVar[str] = ""

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        t = np.zeros(self.dim) if self.translation is None else as_vector(self.translation, self.dim)
        object.__setattr__(self, "translation", t)

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def params(self) -> list[float]:
        raise NotImplementedError

    @property
    def circumradius(self) -> float:
        """Largest distance from the local origin to ``K`` (scale 1)."""
        raise NotImplementedError

    @property
    def inradius(self) -> float | None:
        """Radius of a ball about the local origin inside ``K`` (scale 1), if known."""
        return None

    def with_pose(self, translation=None, scale: float | None = None) -> "TranslatableShape":
        return replace(
            self,
            translation=self.translation if translation is None else translation,
            scale=self.scale if scale is None else scale,
        )

    def _project_local(self, y: np.ndarray, tol: float) -> np.ndarray:
        raise NotImplementedError

    def project(self, points, tol: float = DEFAULT_TOL_PROJ) -> tuple[np.ndarray, np.ndarray]:
        """Closest points and violations for every row of ``points``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise DimensionError(f"shape has dimension {self.dim}, points have {pts.shape[1]}")
        s = self.scale
        local = self._project_local((pts - self.translation) / s, tol / s)
        q = self.translation + s * local
        return q, np.linalg.norm(pts - q, axis=1)

    def violations(self, points, tol: float = DEFAULT_TOL_PROJ) -> np.ndarray:
        return self.project(points, tol)[1]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": [float(v) for v in self.params]}


@dataclass(frozen=True, eq=False, kw_only=True)
class Ball(TranslatableShape):
    radius: float
    kind: ClassVar[str] = "ball"
    ambient_dim: int = 2

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        super().__post_init__()

    @property
    def dim(self) -> int:
        return self.ambient_dim

    @property
    def params(self) -> list[float]:
        return [self.radius]

    @property
    def circumradius(self) -> float:
        return self.radius

    @property
    def inradius(self) -> float:
        return self.radius

    def _project_local(self, y, tol):
        n = np.linalg.norm(y, axis=1)
        factor = np.where(n > self.radius, self.radius / np.where(n > 0, n, 1.0), 1.0)
        return y * factor[:, None]


@dataclass(frozen=True, eq=False, kw_only=True)
class Box(TranslatableShape):
    """Axis-aligned box with the given half-widths, centred on the reference point."""

    half_widths: np.ndarray
    kind: ClassVar[str] = "box"

    def __post_init__(self) -> None:
        h = np.asarray(self.half_widths, dtype=float).ravel()
        if h.size == 0 or not np.all(h > 0):
            raise ValueError("box half-widths must be positive")
        object.__setattr__(self, "half_widths", h)
        super().__post_init__()

    @property
    def dim(self) -> int:
        return self.half_widths.shape[0]

    @property
    def params(self) -> list[float]:
        return list(self.half_widths)

    @property
    def circumradius(self) -> float:
        return float(np.linalg.norm(self.half_widths))

    @property
    def inradius(self) -> float:
        return float(self.half_widths.min())

    def _project_local(self, y, tol):
        return np.clip(y, -self.half_widths, self.half_widths)


@dataclass(frozen=True, eq=False, kw_only=True)
class Ellipsoid(TranslatableShape):
    """Axis-aligned ellipsoid with the given semi-axes, centred on the reference point."""

    semi_axes: np.ndarray
    kind: ClassVar[str] = "ellipsoid"

    def __post_init__(self) -> None:
        a = np.asarray(self.semi_axes, dtype=float).ravel()
        if a.size == 0 or not np.all(a > 0):
            raise ValueError("ellipsoid semi-axes must be positive")
        object.__setattr__(self, "semi_axes", a)
        super().__post_init__()

    @property
    def dim(self) -> int:
        return self.semi_axes.shape[0]

    @property
    def params(self) -> list[float]:
        return list(self.semi_axes)

    @property
    def circumradius(self) -> float:
        return float(self.semi_axes.max())

    @property
    def inradius(self) -> float:
        return float(self.semi_axes.min())

    def _project_local(self, y, tol):
        a2 = self.semi_axes**2
        out = y.copy()
        outside = np.sum(y * y / a2, axis=1) > 1.0
        if not outside.any():
            return out
        z = y[outside]
        # Closest point is a2*z/(a2+lam) for the lam >= 0 that puts it on the surface;
        # the surface residual is decreasing in lam, so bisect on it.
        lo = np.zeros(z.shape[0])
        hi = np.sqrt(a2.max()) * np.linalg.norm(z, axis=1)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            g = np.sum(a2 * z * z / (a2 + mid[:, None]) ** 2, axis=1)
            above = g > 1.0
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
            if np.all(hi - lo <= 1e-15 * np.maximum(hi, 1e-300)):
                break
        lam = 0.5 * (lo + hi)
        out[outside] = a2 * z / (a2 + lam[:, None])
        return out


@dataclass(frozen=True, eq=False, kw_only=True)
class VertexHull(TranslatableShape):
    """Convex hull of a finite vertex list (local coordinates)."""

    vertices: np.ndarray
    kind: ClassVar[str] = "vertex-hull"

    def __post_init__(self) -> None:
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.shape[0] < 1 or v.ndim != 2:
            raise ValueError("vertex hull needs at least one vertex")
        object.__setattr__(self, "vertices", v)
        super().__post_init__()

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def params(self) -> list[float]:
        return list(self.vertices.ravel())

    @property
    def circumradius(self) -> float:
        return float(np.linalg.norm(self.vertices, axis=1).max())

    def _project_local(self, y, tol):
        cap = int(math.ceil(10 * self.vertices.shape[0] / tol))
        out = y.copy()
        for k, p in enumerate(y):
            x = min_norm_point(self.vertices - p, tol, cap)
            # a residual below the tolerance means the point is inside
            if np.linalg.norm(x) > tol:
                out[k] = p + x
        return out


def _affine_minimizer(points: np.ndarray) -> np.ndarray:
    k = points.shape[0]
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = points @ points.T
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[:k]


def min_norm_point(vertices: np.ndarray, tol: float = DEFAULT_TOL_PROJ, max_iter: int | None = None) -> np.ndarray:
    """Minimum-norm point of ``conv(vertices)`` by Wolfe's algorithm.

    Major steps are Gilbert (Frank-Wolfe) vertex selections; minor steps
    move to the affine minimiser of the active set and drop vertices whose
    weight hits zero. Stops when the Frank-Wolfe gap certifies the iterate
    is within ``tol`` of the optimum or cannot be improved in floating
    point.
    """
    V = np.atleast_2d(vertices)
    m = V.shape[0]
    if max_iter is None:
        max_iter = int(math.ceil(10 * m / tol))
    sq = np.einsum("ij,ij->i", V, V)
    floor = 1e-14 * max(float(sq.max()), 1e-300)
    active = [int(np.argmin(sq))]
    lam = np.array([1.0])
    x = V[active[0]].copy()
    steps = 0
    while steps < max_iter:
        steps += 1
        dots = V @ x
        k = int(np.argmin(dots))
        gap = float(x @ x - dots[k])
        if 2.0 * gap <= tol * tol or gap <= floor or k in active:
            return x
        active.append(k)
        lam = np.append(lam, 0.0)
        while True:
            steps += 1
            mu = _affine_minimizer(V[active])
            if np.all(mu > 1e-12):
                lam = mu
                x = mu @ V[active]
                break
            neg = mu <= 1e-12
            denom = lam[neg] - mu[neg]
            ratios = np.where(denom > 0, lam[neg] / np.where(denom > 0, denom, 1.0), 1.0)
            theta = min(1.0, float(ratios.min()))
            lam = lam + theta * (mu - lam)
            keep = lam > 1e-12
            if keep.all():
                # numerical stall: drop the smallest weight to guarantee progress
                keep[int(np.argmin(lam))] = False
            active = [a for a, kp in zip(active, keep) if kp]
            lam = lam[keep]
            lam = lam / lam.sum()
            x = lam @ V[active]
            if len(active) == 1:
                break
    raise ProjectionError(f"hull projection did not converge in {max_iter} steps")


def closest_point(shape: TranslatableShape, p, tol: float = DEFAULT_TOL_PROJ) -> tuple[np.ndarray, float]:
    p = as_vector(p)
    if p.shape[0] != shape.dim:
        raise DimensionError(f"shape has dimension {shape.dim}, point has {p.shape[0]}")
    q, v = shape.project(p[None, :], tol)
    return q[0], float(v[0])


SHAPE_KINDS = ("ball", "box", "ellipsoid", "vertex-hull")


def make_shape(kind: str, params, dim: int, translation=None, scale: float = 1.0) -> TranslatableShape:
    """Build a shape from the ``kind`` tag and flat parameter list used in instance files.

    A single box half-width or ellipsoid semi-axis is broadcast to every
    coordinate; vertex-hull parameters are the vertex coordinates row by row.
    """
    params = np.asarray(params, dtype=float).ravel()
    if kind == "ball":
        if params.size != 1:
            raise ValueError("ball takes exactly one parameter (radius)")
        return Ball(radius=float(params[0]), ambient_dim=dim, translation=translation, scale=scale)
    if kind in ("box", "ellipsoid"):
        if params.size == 1:
            params = np.full(dim, params[0])
        if params.size != dim:
            raise ValueError(f"{kind} needs 1 or {dim} parameters, got {params.size}")
        cls = Box if kind == "box" else Ellipsoid
        key = "half_widths" if kind == "box" else "semi_axes"
        return cls(**{key: params}, translation=translation, scale=scale)
    if kind == "vertex-hull":
        if params.size == 0 or params.size % dim:
            raise ValueError(f"vertex-hull parameters must be a multiple of the dimension {dim}")
        return VertexHull(vertices=params.reshape(-1, dim), translation=translation, scale=scale)
    raise ValueError(f"unknown shape kind {kind!r}; expected one of {SHAPE_KINDS}")


@dataclass(frozen=True, eq=False)
class UnionShape:
    """A few convex parts moved and scaled together.

    Each part's own translation is its offset from the common reference
    point, in local (scale 1) coordinates.
    """

    parts: tuple[TranslatableShape, ...]
    translation: np.ndarray | None = None
    scale: float = 1.0

    def __post_init__(self) -> None:
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("union needs at least one part")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise DimensionError("union parts must share one dimension")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "parts", parts)
        dim = dims.pop()
        t = np.zeros(dim) if self.translation is None else as_vector(self.translation, dim)
        object.__setattr__(self, "translation", t)

    @property
    def dim(self) -> int:
        return self.parts[0].dim

    def with_pose(self, translation=None, scale: float | None = None) -> "UnionShape":
        return replace(
            self,
            translation=self.translation if translation is None else translation,
            scale=self.scale if scale is None else scale,
        )

    def posed_part(self, j: int) -> TranslatableShape:
        part = self.parts[j]
        return part.with_pose(self.translation + self.scale * part.translation, self.scale)

    def project_parts(self, points, tol: float = DEFAULT_TOL_PROJ) -> tuple[np.ndarray, np.ndarray]:
        """Closest points ``(c, n, d)`` and violations ``(c, n)`` for every part."""
        qs, vs = zip(*(self.posed_part(j).project(points, tol) for j in range(len(self.parts))))
        return np.stack(qs), np.stack(vs)

    def violations(self, points, tol: float = DEFAULT_TOL_PROJ) -> np.ndarray:
        return self.project_parts(points, tol)[1].min(axis=0)


# --------------------------------------------------------------------------
# angular profiles for rotation about the origin


class Coverage(NamedTuple):
    state: str  # "full", "angle" or "empty"
    angle: float = math.nan


FULL = Coverage("full", math.pi / 2)
EMPTY = Coverage("empty")

PROFILE_KINDS = ("half-cylinder", "cone", "half-ellipsoid", "full-cylinder", "full-ellipsoid", "double-cone")
_SYMMETRIC = {"full-cylinder", "full-ellipsoid", "double-cone"}
_N_PARAMS = {
    "half-cylinder": 1,
    "full-cylinder": 1,
    "cone": 1,
    "double-cone": 1,
    "half-ellipsoid": 2,
    "full-ellipsoid": 2,
}


@dataclass(frozen=True)
class AngularProfile:
    """Axis-symmetric shape about the origin, seen through its angular radius.

    Parameters by kind: cylinders take the radius ``r``; cones the
    half-angle ``beta``; ellipsoids ``(a, b)`` with ``a`` the semi-axis
    along the symmetry axis and ``b`` the transverse one. Half shapes lie
    on the ``+axis`` side of the origin; the symmetric kinds are symmetric
    under ``x -> -x``.
    """

    kind: str
    params: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.kind not in _N_PARAMS:
            raise ValueError(f"unknown profile kind {self.kind!r}; expected one of {PROFILE_KINDS}")
        params = tuple(float(v) for v in np.ravel(self.params))
        object.__setattr__(self, "params", params)
        if len(params) != _N_PARAMS[self.kind]:
            raise ValueError(f"{self.kind} takes {_N_PARAMS[self.kind]} parameter(s)")
        if not all(v > 0 for v in params):
            raise ValueError("profile parameters must be positive")
        if self.kind in ("cone", "double-cone") and params[0] > math.pi / 2:
            raise ValueError("cone half-angle must not exceed pi/2")
        if self.kind.endswith("ellipsoid") and params[0] < params[1]:
            # An oblate body meets large spheres in an equatorial band, not a cap
            # around the axis, so no single angular radius describes it.
            raise ValueError("ellipsoid profile needs the axial semi-axis >= the transverse one")

    @property
    def symmetric(self) -> bool:
        return self.kind in _SYMMETRIC

    def angular_radius(self, rho: float) -> Coverage:
        if not rho > 0:
            raise ValueError("rho must be positive")
        a = float(self.alpha_many(np.array([rho]))[0])
        if math.isnan(a):
            return EMPTY
        if math.isinf(a):
            return FULL
        return Coverage("angle", a)

    def alpha_many(self, rho: np.ndarray) -> np.ndarray:
        """Vectorised angular radius: ``+inf`` marks Full and ``nan`` marks Empty."""
        rho = np.asarray(rho, dtype=float)
        k = self.kind
        with np.errstate(divide="ignore", invalid="ignore"):
            if k in ("cone", "double-cone"):
                return np.full(rho.shape, self.params[0])
            if k.endswith("cylinder"):
                r = self.params[0]
                out = np.arcsin(np.minimum(1.0, r / rho))
                inside = rho <= r
            else:
                a, b = self.params
                if a == b:
                    out = np.where(rho <= a, math.pi / 2, math.nan)
                else:
                    c2 = (1.0 / b**2 - 1.0 / rho**2) / (1.0 / b**2 - 1.0 / a**2)
                    out = np.where(rho <= a, np.arccos(np.sqrt(np.clip(c2, 0.0, 1.0))), math.nan)
                inside = rho <= b
                out = np.where(inside, math.pi / 2, out)
        if self.symmetric:
            out = np.where(inside, math.inf, out)
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


def effective_angles(profile: AngularProfile, phi: np.ndarray) -> np.ndarray:
    """Angle to the nearest covered end of the axis."""
    return np.minimum(phi, math.pi - phi) if profile.symmetric else phi


def angular_violations(profile: AngularProfile, rho: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Chord length ``2 rho sin((phi - alpha)/2)`` each point still has to rotate.

    Zero for covered points and ``inf`` for points no rotation can cover.
    """
    alpha = profile.alpha_many(np.where(rho > 0, rho, 1.0))
    excess = effective_angles(profile, phi) - alpha
    v = 2.0 * rho * np.sin(np.maximum(excess, 0.0) / 2.0)
    v = np.where(np.isinf(alpha) | (rho == 0), 0.0, v)
    return np.where(np.isnan(alpha) & (rho > 0), math.inf, v)


def smallest_touching_rotation(profile: AngularProfile, u, p) -> list[tuple[float, np.ndarray]]:
    """Rotations of the axis, within the plane of ``u`` and ``p``, that put ``p`` on the surface.

    One candidate for half shapes. Symmetric shapes give two: swing the
    near end of the axis toward ``p``, or swing it away so the far end
    catches ``p``. Positive ``theta`` turns toward ``p``.
    """
    u = as_vector(u)
    p = as_vector(p, u.shape[0])
    if abs(np.linalg.norm(u) - 1.0) > TOL:
        raise ValueError("axis must be unit length")
    rho = float(np.linalg.norm(p))
    if rho == 0.0:
        raise ValueError("the origin has no rotation plane")
    cov = profile.angular_radius(rho)
    if cov.state == "empty":
        raise UncoverableError("point uncoverable at this scale")
    if cov.state == "full":
        raise ValueError("point is covered by every axis")
    e = orthogonal_direction(u, p)
    if float(p @ e) < 0:
        # the fallback plane for p antiparallel to u may point away from p
        e = -e
    phi = math.atan2(float(p @ e), float(p @ u))
    alpha = cov.angle
    near = phi - alpha
    if profile.symmetric:
        far = (math.pi - phi) - alpha
        if min(near, far) < -TOL:
            raise ValueError("point is already inside the shape")
        near, far = max(near, 0.0), max(far, 0.0)
        return [(near, rotate_in_plane(u, e, near)), (-far, rotate_in_plane(u, e, -far))]
    if near < -TOL:
        raise ValueError("point is already inside the shape")
    near = max(near, 0.0)
    return [(near, rotate_in_plane(u, e, near))]
