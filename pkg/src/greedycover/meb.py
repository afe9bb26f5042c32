"""Approximate minimum enclosing ball by moving toward the farthest point.

Three entry points:

* :func:`meb_fixed_radius` - the ball has a guessed radius and is dragged
  toward the farthest point until that point sits on its surface;
* :func:`meb_binary_search` - wraps the above in a search over the radius;
* :func:`mebopt` - grows a lower bound on the radius while shrinking the
  gap, with no outer search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import as_cloud, as_vector, reference_diameter
from .trace import MEB_COLUMNS, ConvergenceTrace, Status

ITER_CAP_MULT = 64
INNER_CONST = 16
GUARANTEE_CONST = 3


@dataclass
class BallState:
    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")


@dataclass
class MEBResult:
    status: Status
    ball: BallState
    covering_radius: float
    trace: ConvergenceTrace
    path: list[np.ndarray] = field(default_factory=list)
    epochs: list[dict] = field(default_factory=list)
    tries: list[dict] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.trace)


def _dists(cloud: np.ndarray, c: np.ndarray) -> np.ndarray:
    diff = cloud - c
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def _move_toward_farthest(cloud, center, r, iterations, trace, path, threshold=None, first_iteration=1):
    """Run up to ``iterations`` moves of B(center, r) toward the farthest point.

    Stops early once no point is farther than ``threshold`` (default ``r``).
    Returns ``(center, covered, moves)``.
    """
    limit = r if threshold is None else threshold
    c = center
    moves = 0
    # |p - c|^2 = |p|^2 - 2 p.c + |c|^2 picks the farthest point with one
    # matrix-vector product; its distance is then recomputed directly.
    sq = np.einsum("ij,ij->i", cloud, cloud)
    while True:
        i = int((sq - 2.0 * (cloud @ c)).argmax())
        diff = cloud[i] - c
        d = math.sqrt(diff @ diff)
        if d <= limit:
            return c, True, moves
        if moves == iterations:
            return c, False, moves
        step = d - r
        c = c + (step / d) * diff
        moves += 1
        trace.add(
            iteration=first_iteration + moves - 1,
            violator_index=i,
            move_length=float(step),
            max_violation=float(d - r),
        )
        if path is not None:
            path.append(c)


def meb_fixed_radius(
    cloud,
    r: float,
    eps: float,
    start=None,
    iter_cap: int | None = None,
    record_path: bool = True,
) -> MEBResult:
    """Greedy covering with a ball of fixed radius ``r``.

    Covered once every point is within ``(1 + eps) * r`` of the centre;
    CapExceeded after ``iter_cap`` moves (default ``ceil(64/eps)``), which
    certifies that ``r`` is too small.
    """
    cloud = as_cloud(cloud)
    _check_eps(eps)
    if not r > 0:
        raise ValueError("radius must be positive")
    c = cloud[0].copy() if start is None else as_vector(start, cloud.shape[1]).copy()
    if iter_cap is None:
        iter_cap = math.ceil(ITER_CAP_MULT / eps)
    trace = ConvergenceTrace(MEB_COLUMNS)
    path = [c] if record_path else None
    c, covered, _ = _move_toward_farthest(cloud, c, r, iter_cap, trace, path, threshold=(1 + eps) * r)
    trace.status = Status.COVERED if covered else Status.CAP_EXCEEDED
    return MEBResult(
        status=trace.status,
        ball=BallState(c, r),
        covering_radius=float(_dists(cloud, c).max()),
        trace=trace,
        path=path or [],
    )


def _halvings(eps: float) -> int:
    return math.ceil(math.log2(1.0 / eps)) + 2


def meb_binary_search(cloud, eps: float, iter_cap_mult: float = ITER_CAP_MULT) -> MEBResult:
    """Approximate MEB by searching the radius of :func:`meb_fixed_radius`.

    The optimum lies in ``[D/2, D]`` where ``D`` is the distance from the
    first point to its farthest point. The bracket is halved geometrically;
    a CapExceeded run means the guess was too small. Each try runs at
    tolerance ``eps/2`` so that its slack and the leftover bracket width
    together stay below ``eps``. The returned ball is the tightest covering
    ball produced by any Covered run.
    """
    cloud = as_cloud(cloud)
    _check_eps(eps)
    D = reference_diameter(cloud)
    trace = ConvergenceTrace(MEB_COLUMNS, status=Status.COVERED)
    best = MEBResult(Status.COVERED, BallState(cloud[0].copy(), D), D, trace)
    if D == 0.0:
        return best
    lo, hi = D / 2, D
    inner = eps / 2
    cap = math.ceil(iter_cap_mult / inner)
    tries = []
    for _ in range(_halvings(eps)):
        mid = math.sqrt(lo * hi)
        res = meb_fixed_radius(cloud, mid, inner, start=best.ball.center, iter_cap=cap, record_path=False)
        tries.append({"radius": mid, "status": res.status.value, "iterations": res.iterations})
        if res.status is Status.COVERED:
            hi = mid
            if res.covering_radius < best.covering_radius:
                best = res
        else:
            lo = mid
    return MEBResult(
        status=Status.COVERED,
        ball=BallState(best.ball.center, best.covering_radius),
        covering_radius=best.covering_radius,
        trace=best.trace,
        tries=tries,
    )


def mebopt(cloud, eps: float, inner_const: float = INNER_CONST, record_path: bool = False) -> MEBResult:
    """Search-free MEB: keep ``r <= r_opt <= r + delta`` and shrink ``delta`` by 3/4 per epoch.

    Each epoch runs ``ceil(inner_const / delta')`` farthest-point moves
    (``delta'`` is ``delta`` in units of ``D/2``), then measures how far the
    farthest point sits outside ``B(C, r)``. If it is more than
    ``3 delta / 4`` the radius was too small by at least ``delta / 4``.
    After the loop one more epoch polishes the centre; the covering radius
    is then at most ``r_opt + 3 delta``.
    """
    cloud = as_cloud(cloud)
    _check_eps(eps)
    D = reference_diameter(cloud)
    trace = ConvergenceTrace(MEB_COLUMNS)
    c = cloud[0].copy()
    if D == 0.0:
        trace.status = Status.COVERED
        return MEBResult(Status.COVERED, BallState(c, 0.0), 0.0, trace, path=[c])
    r_scale = D / 2
    r = delta = D / 2
    path = [c] if record_path else None
    epochs: list[dict] = []
    best_c, best_cover = c, float(_dists(cloud, c).max())

    def epoch(c, r, delta):
        n_iter = math.ceil(inner_const * r_scale / delta)
        c, _, _ = _move_toward_farthest(cloud, c, r, n_iter, trace, path, first_iteration=len(trace) + 1)
        return c, float(_dists(cloud, c).max())

    while delta > eps * r_scale:
        c, cover = epoch(c, r, delta)
        s = max(0.0, cover - r)
        grew = s > 0.75 * delta
        epochs.append({"radius": r, "delta": delta, "s": s, "grew": grew})
        if cover < best_cover:
            best_c, best_cover = c, cover
        if grew:
            r += delta / 4
        delta *= 0.75
    c, cover = epoch(c, r, delta)
    epochs.append({"radius": r, "delta": delta, "s": max(0.0, cover - r), "grew": False})
    if cover < best_cover:
        best_c, best_cover = c, cover
    trace.status = Status.COVERED
    return MEBResult(
        status=Status.COVERED,
        ball=BallState(best_c, best_cover),
        covering_radius=best_cover,
        trace=trace,
        path=path or [],
        epochs=epochs,
    )
