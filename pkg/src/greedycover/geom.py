"""Dense vector kernel shared by every solver.

Points are plain ``float64`` numpy arrays. A point cloud is an ``(n, d)``
array; there is no wrapper class because every solver immediately needs
the raw array for vectorised scans.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

TOL = 1e-9


class DimensionError(ValueError):
    """Raised when vectors or clouds of different dimension are combined."""


def as_vector(v, dim: int | None = None) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite coordinates")
    return a


def as_cloud(points) -> np.ndarray:
    """Validate and return an ``(n, d)`` float array.

    The cloud must be nonempty, two-dimensional and finite.
    """
    a = np.asarray(points, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        raise DimensionError(f"point cloud must be a nonempty (n, d) array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("point cloud has non-finite coordinates")
    return a


def dist(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def distances_from(cloud: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.linalg.norm(cloud - c, axis=1)


def farthest_point(cloud: np.ndarray, score: Callable[[np.ndarray], np.ndarray]) -> tuple[int, float]:
    """Index and value of the maximal score over the cloud.

    ``score`` maps the whole ``(n, d)`` array to ``n`` scores. Ties go to
    the smallest index, which is what ``np.argmax`` already does.
    """
    values = np.asarray(score(cloud), dtype=float)
    i = int(np.argmax(values))
    return i, float(values[i])


def farthest_from(cloud: np.ndarray, c: np.ndarray) -> tuple[int, float]:
    return farthest_point(cloud, lambda pts: distances_from(pts, c))


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalise the zero vector")
    return v / n


def angle_between(a: np.ndarray, b: np.ndarray) -> float:
    """Angle in ``[0, pi]`` between two nonzero vectors.

    Uses ``atan2`` of the cross and dot magnitudes, which stays accurate
    for nearly parallel vectors where ``arccos`` loses half its digits.
    """
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("angle undefined for the zero vector")
    ua = a / na
    ub = b / nb
    c = float(ua @ ub)
    s = float(np.linalg.norm(ub - c * ua))
    return math.atan2(s, c)


def angles_to_axis(cloud: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Norms and polar angles of every point relative to unit axis ``u``.

    Points at the origin get angle 0.
    """
    rho = np.linalg.norm(cloud, axis=1)
    along = cloud @ u
    perp = np.linalg.norm(cloud - np.outer(along, u), axis=1)
    return rho, np.arctan2(perp, along)


def check_orthonormal(u: np.ndarray, e: np.ndarray, tol: float = TOL) -> None:
    if abs(np.linalg.norm(u) - 1.0) > tol or abs(np.linalg.norm(e) - 1.0) > tol:
        raise ValueError("rotation vectors must be unit length")
    if abs(float(u @ e)) > tol:
        raise ValueError("rotation vectors must be orthogonal")


def rotate_in_plane(u, e, theta: float) -> np.ndarray:
    """Rotate unit ``u`` by ``theta`` radians toward unit ``e`` (``e`` orthogonal to ``u``)."""
    u = np.asarray(u, dtype=float)
    e = np.asarray(e, dtype=float)
    if u.shape != e.shape:
        raise DimensionError(f"dimension mismatch: {u.shape} vs {e.shape}")
    check_orthonormal(u, e)
    r = math.cos(theta) * u + math.sin(theta) * e
    return r / np.linalg.norm(r)


def orthogonal_direction(u: np.ndarray, p: np.ndarray, tol: float = TOL) -> np.ndarray:
    """Unit component of ``p`` orthogonal to unit ``u``.

    When ``p`` is parallel to ``u`` any plane through ``u`` will do; the
    first canonical basis vector not parallel to ``u`` is used instead.
    """
    w = p - (p @ u) * u
    n = np.linalg.norm(w)
    if n > tol * max(1.0, float(np.linalg.norm(p))):
        return w / n
    for k in range(u.shape[0]):
        basis = np.zeros_like(u)
        basis[k] = 1.0
        w = basis - (basis @ u) * u
        n = np.linalg.norm(w)
        if n > 1e-6:
            return w / n
    raise ValueError("no orthogonal direction exists in dimension 1")


def project_to_line(p, a, u) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > TOL:
        raise ValueError("line direction must be unit length")
    return a + ((p - a) @ u) * u


def distances_to_line(cloud: np.ndarray, a: np.ndarray, u: np.ndarray) -> np.ndarray:
    rel = cloud - a
    along = rel @ u
    return np.linalg.norm(rel - np.outer(along, u), axis=1)


def reference_diameter(cloud: np.ndarray) -> float:
    """Distance from the first point to its farthest point.

    This is the cheap diameter proxy used to bracket every scale search:
    it lies between half the diameter and the diameter.
    """
    return float(distances_from(cloud, cloud[0]).max())


def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Indices of the convex hull vertices of 2-D ``points``, counter-clockwise.

    Andrew's monotone chain; collinear boundary points are dropped. A
    single distinct point gives one index, collinear input gives the two
    extremes.
    """
    pts = np.asarray(points, dtype=float)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    # repeated coordinates would survive the chain as zero-length edges
    s = pts[order]
    keep = np.ones(len(order), dtype=bool)
    keep[1:] = np.any(s[1:] != s[:-1], axis=1)
    order = order[keep]
    if order.shape[0] < 3:
        return order

    def cross(o, a, b):
        return (pts[a, 0] - pts[o, 0]) * (pts[b, 1] - pts[o, 1]) - (pts[a, 1] - pts[o, 1]) * (pts[b, 0] - pts[o, 0])

    def chain(seq):
        out: list[int] = []
        for i in seq:
            while len(out) >= 2 and cross(out[-2], out[-1], i) <= 0:
                out.pop()
            out.append(int(i))
        return out

    lower = chain(order)
    upper = chain(order[::-1])
    hull = lower[:-1] + upper[:-1]
    if not hull:
        return order[:1]
    return np.array(hull, dtype=int)
