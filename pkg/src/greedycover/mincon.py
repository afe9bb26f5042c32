"""Translation-only covering by a convex shape of fixed orientation.

The shape is repeatedly translated by ``P - Q`` where ``P`` is the point
farthest outside it and ``Q`` the closest point of the shape to ``P``.
With the scale at least optimal the offset to an optimal pose shrinks in
squared length by the squared move length every step, so at most
``1/eps**2`` moves are needed when moves exceed ``eps`` (in units of the
instance diameter proxy). Running longer certifies the scale is too small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import as_cloud, as_vector, reference_diameter
from .shapes import TranslatableShape, UnionShape
from .trace import MEB_COLUMNS, ConvergenceTrace, Status

DEFAULT_BUDGET = 1_000_000


def default_iter_cap(eps: float) -> int:
    return math.ceil(1.0 / eps**2) + 1


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def _scale_unit(cloud: np.ndarray, r_scale: float | None) -> float:
    if r_scale is not None:
        return float(r_scale)
    D = reference_diameter(cloud)
    return D if D > 0 else 1.0


@dataclass
class TranslationResult:
    status: Status
    shape: TranslatableShape
    trace: ConvergenceTrace
    visited: list[int]
    max_violation: float
    r_scale: float
    path: list[np.ndarray] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.visited)

    @property
    def translation(self) -> np.ndarray:
        return self.shape.translation


def mincon_fixed_scale(
    cloud,
    shape: TranslatableShape,
    eps: float,
    start=None,
    iter_cap: int | None = None,
    r_scale: float | None = None,
    tol_proj: float | None = None,
    record_path: bool = True,
) -> TranslationResult:
    """Translate ``shape`` (at its current scale) until it covers ``cloud`` within ``eps * r_scale``.

    ``start`` is the initial translation (default: the first point).
    """
    cloud = as_cloud(cloud)
    _check_eps(eps)
    if shape.dim != cloud.shape[1]:
        raise ValueError(f"shape dimension {shape.dim} does not match cloud dimension {cloud.shape[1]}")
    r_scale = _scale_unit(cloud, r_scale)
    tol = eps * r_scale / 10 if tol_proj is None else tol_proj
    if iter_cap is None:
        iter_cap = default_iter_cap(eps)
    t = cloud[0].copy() if start is None else as_vector(start, cloud.shape[1]).copy()
    posed = shape.with_pose(t)
    trace = ConvergenceTrace(MEB_COLUMNS)
    visited: list[int] = []
    path = [t] if record_path else []
    limit = eps * r_scale
    while True:
        q, v = posed.project(cloud, tol)
        i = int(np.argmax(v))
        if v[i] <= limit:
            status = Status.COVERED
            break
        if len(visited) == iter_cap:
            status = Status.CAP_EXCEEDED
            break
        move = cloud[i] - q[i]
        t = posed.translation + move
        posed = posed.with_pose(t)
        visited.append(i)
        trace.add(iteration=len(visited), violator_index=i, move_length=float(v[i]), max_violation=float(v[i]))
        if record_path:
            path.append(t)
    trace.status = status
    return TranslationResult(status, posed, trace, visited, float(v[i]), r_scale, path)


@dataclass
class ScaleSearchResult:
    status: Status
    scale: float
    translation: np.ndarray
    shape: TranslatableShape | None
    trace: ConvergenceTrace
    tries: list[dict] = field(default_factory=list)


def scale_bracket(cloud: np.ndarray, shape: TranslatableShape) -> tuple[float, float | None]:
    """Scales below which the shape cannot cover the cloud, and at which it surely does.

    The upper end is ``None`` when the shape's inradius is not known in
    closed form (vertex hulls); callers then double until covered.
    """
    D = reference_diameter(cloud)
    lo = D / (2.0 * shape.circumradius)
    inr = shape.inradius
    return lo, (None if inr is None else D / inr)


def mincon_scale_search(cloud, shape: TranslatableShape, eps: float, iter_cap: int | None = None) -> ScaleSearchResult:
    """Smallest scale, over a geometric bisection, at which :func:`mincon_fixed_scale` covers.

    The bracket ``[D / (2 R), D / w]`` uses the circumradius ``R`` and
    inradius ``w`` of the shape at scale 1 about its reference point.
    """
    cloud = as_cloud(cloud)
    _check_eps(eps)
    D = reference_diameter(cloud)
    if D == 0.0:
        trace = ConvergenceTrace(MEB_COLUMNS, status=Status.COVERED)
        return ScaleSearchResult(Status.COVERED, 0.0, cloud[0].copy(), None, trace)
    lo, hi = scale_bracket(cloud, shape)
    tries: list[dict] = []

    def attempt(scale):
        res = mincon_fixed_scale(cloud, shape.with_pose(scale=scale), eps, iter_cap=iter_cap, r_scale=D, record_path=False)
        tries.append({"scale": scale, "status": res.status.value, "iterations": res.iterations})
        return res

    best = None
    if hi is None:
        hi = 2.0 * lo
        for _ in range(64):
            best = attempt(hi)
            if best.status is Status.COVERED:
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise RuntimeError("could not find a covering scale")
    else:
        best = attempt(hi)
    if best.status is not Status.COVERED:
        raise RuntimeError("upper scale bracket failed to cover; shape reference point outside the body?")
    best_scale = hi
    for _ in range(math.ceil(math.log2(1.0 / eps)) + 2):
        mid = math.sqrt(lo * hi)
        res = attempt(mid)
        if res.status is Status.COVERED:
            hi = best_scale = mid
            best = res
        else:
            lo = mid
    return ScaleSearchResult(Status.COVERED, best_scale, best.translation, best.shape, best.trace, tries)


# --------------------------------------------------------------------------
# unions of convex parts


@dataclass
class UnionResult:
    status: Status
    union: UnionShape
    trace: ConvergenceTrace
    guesses: list[int]
    max_violation: float
    nodes: int
    restarts: int = 0
    guess_log: list[list[int]] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.guesses)


def _union_step(cloud, union: UnionShape, tol):
    q, v = union.project_parts(cloud, tol)
    best = v.min(axis=0)
    i = int(np.argmax(best))
    return i, float(best[i]), q[:, i, :]


def mincon_union(
    cloud,
    union: UnionShape,
    eps: float,
    strategy: str = "exhaustive",
    restarts: int = 32,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    iter_cap: int | None = None,
    start=None,
    r_scale: float | None = None,
) -> UnionResult:
    """Cover with a union of convex parts sharing one pose.

    Every move guesses which part should take the violator and translates
    the common pose until that part touches it. ``exhaustive`` walks guess
    strings depth first, parts in declaration order, until a Covered leaf
    or ``budget`` visited nodes; ``randomized`` draws guesses uniformly
    and restarts on CapExceeded, stream ``k`` seeded by ``(seed, k)``.
    """
    cloud = as_cloud(cloud)
    _check_eps(eps)
    r_scale = _scale_unit(cloud, r_scale)
    tol = eps * r_scale / 10
    if iter_cap is None:
        iter_cap = default_iter_cap(eps)
    limit = eps * r_scale
    t0 = cloud[0].copy() if start is None else as_vector(start, cloud.shape[1]).copy()
    c = len(union.parts)
    best = {"viol": math.inf, "t": t0, "guesses": [], "rows": []}

    def finish(status, t, guesses, rows, viol, nodes, restarts_used=0, log=()):
        trace = ConvergenceTrace(MEB_COLUMNS, status=status)
        for row in rows:
            trace.add(**row)
        return UnionResult(status, union.with_pose(t), trace, list(guesses), viol, nodes, restarts_used, list(log))

    if strategy == "exhaustive":
        stack = [(t0, [], [])]
        nodes = 0
        while stack:
            if nodes >= budget:
                break
            t, guesses, rows = stack.pop()
            nodes += 1
            i, viol, qs = _union_step(cloud, union.with_pose(t), tol)
            if viol < best["viol"]:
                best = {"viol": viol, "t": t, "guesses": guesses, "rows": rows}
            if viol <= limit:
                return finish(Status.COVERED, t, guesses, rows, viol, nodes)
            if len(guesses) == iter_cap:
                continue
            for j in reversed(range(c)):
                move = cloud[i] - qs[j]
                row = {
                    "iteration": len(guesses) + 1,
                    "violator_index": i,
                    "move_length": float(np.linalg.norm(move)),
                    "max_violation": viol,
                }
                stack.append((t + move, guesses + [j], rows + [row]))
        return finish(Status.CAP_EXCEEDED, best["t"], best["guesses"], best["rows"], best["viol"], nodes)

    if strategy == "randomized":
        nodes = 0
        log = []
        for k in range(restarts):
            rng = np.random.default_rng([seed, k])
            t, guesses, rows = t0, [], []
            while True:
                nodes += 1
                i, viol, qs = _union_step(cloud, union.with_pose(t), tol)
                if viol < best["viol"]:
                    best = {"viol": viol, "t": t, "guesses": list(guesses), "rows": list(rows)}
                if viol <= limit:
                    log.append(guesses)
                    return finish(Status.COVERED, t, guesses, rows, viol, nodes, k + 1, log)
                if len(guesses) == iter_cap:
                    break
                j = int(rng.integers(c))
                move = cloud[i] - qs[j]
                rows.append(
                    {
                        "iteration": len(guesses) + 1,
                        "violator_index": i,
                        "move_length": float(np.linalg.norm(move)),
                        "max_violation": viol,
                    }
                )
                guesses.append(j)
                t = t + move
            log.append(guesses)
        return finish(Status.CAP_EXCEEDED, best["t"], best["guesses"], best["rows"], best["viol"], nodes, restarts, log)

    raise ValueError(f"unknown strategy {strategy!r}; expected 'exhaustive' or 'randomized'")
