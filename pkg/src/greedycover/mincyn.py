"""Minimum-radius cylinder with an unrestricted axis.

The axis is carried by two anchor points ``U_i`` and ``V_i`` that estimate
the extreme projections ``U`` and ``V`` of the cloud onto the optimal axis.
While some point ``P`` lies farther than ``(1 + eps) r`` from the axis,
both anchors are re-guessed inside the plane ``h`` spanned by the axis and
``P``. Candidates are nodes of a square mesh of side ``eps r / 8`` anchored
at the old anchor, within ``5 r`` of it.

Lengths are measured in units of the radius guess ``r``: the potential
``Phi = d(U, U_i)**2 + d(V, V_i)**2`` (known only on planted instances)
drops by at least ``eps**2 / 2`` per step when every guess is the mesh
point nearest to the projection of the true anchor.

Guessing strategies
-------------------
``oracle-guided``
    Takes the mesh points nearest to the projected true anchors. It needs
    the planted anchors and exists for testing.
``randomized``
    Draws each anchor uniformly from its disk of mesh nodes and restarts
    from the initial axis whenever a run reaches the cap. With
    ``prune=True`` the pair is drawn uniformly from the admissible pairs
    (see below) instead.
``exhaustive``
    Depth first search over admissible pairs. Pairs are ordered by how
    well their segment fits the in-plane projection of the cloud, and the
    number of visited states is budgeted.

A pair ``(A, B)`` is admissible when it could be the oracle's choice for
some cylinder of radius at most ``r``:

* ``A`` and ``B`` lie within ``1 + delta`` (``delta = eps sqrt(2) / 16``,
  half a mesh diagonal) of some projected cloud point, since ``U`` is the
  projection of a cloud point onto the optimal axis;
* every projected point lies within ``1 + delta`` of the segment ``AB``,
  because projecting onto ``h`` never increases distances;
* at least one anchor moves by ``eps - delta`` or more, which is the step
  length bound behind the potential drop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import as_cloud, as_vector, convex_hull_2d, distances_to_line, unit
from .trace import CYLINDER_COLUMNS, ConvergenceTrace, Status

MESH_RADIUS = 5.0
MESH_DIVISOR = 8
INIT_BOUND = 4.0
DEFAULT_BUDGET = 10_000_000
STRATEGIES = ("exhaustive", "randomized", "oracle-guided")


@dataclass
class CylinderState:
    """Axis through the anchors ``U`` and ``V``, with radius guess ``radius``."""

    U: np.ndarray
    V: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        self.U = as_vector(self.U)
        self.V = as_vector(self.V, self.U.shape[0])
        if not np.linalg.norm(self.V - self.U) > 0:
            raise ValueError("degenerate axis: U and V coincide")

    @property
    def direction(self) -> np.ndarray:
        return unit(self.V - self.U)

    def distances(self, cloud: np.ndarray) -> np.ndarray:
        return distances_to_line(cloud, self.U, self.direction)

    def to_dict(self) -> dict:
        return {"U": self.U.tolist(), "V": self.V.tolist(), "axis": self.direction.tolist(), "radius": self.radius}


@dataclass(frozen=True)
class MeshGuess:
    """A node of the mesh in plane ``h`` anchored at ``origin``.

    ``basis`` holds two orthonormal rows (axis direction, in-plane
    perpendicular); the node is ``origin + spacing * (j * basis[0] + k * basis[1])``.
    """

    origin: np.ndarray
    basis: np.ndarray
    offset: tuple[int, int]
    spacing: float

    @property
    def point(self) -> np.ndarray:
        j, k = self.offset
        return self.origin + self.spacing * (j * self.basis[0] + k * self.basis[1])


@dataclass
class CylinderResult:
    status: Status
    state: CylinderState
    trace: ConvergenceTrace
    visited: list[int]
    max_violation: float
    covering_radius: float
    guesses: list[tuple[tuple[int, int], tuple[int, int]]] = field(default_factory=list)
    potentials: list[float] = field(default_factory=list)
    anchor_distances: list[tuple[float, float]] = field(default_factory=list)
    nodes: int = 0
    restarts: int = 0

    @property
    def iterations(self) -> int:
        return len(self.visited)


def default_iter_cap(eps: float) -> int:
    return math.ceil(4.0 / eps**2)


def mesh_spacing(eps: float) -> float:
    return eps / MESH_DIVISOR


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def mincyn_init(cloud, radius: float | None = None) -> CylinderState:
    """Initial axis through the first point ``X`` and its farthest point ``Y``.

    The anchors are the two extreme projections of the cloud onto that
    line. ``radius`` defaults to the largest distance from the line, which
    always covers.
    """
    cloud = as_cloud(cloud)
    x = cloud[0]
    d = np.linalg.norm(cloud - x, axis=1)
    j = int(np.argmax(d))
    if d[j] == 0.0:
        raise ValueError("all points coincide; the axis is undetermined")
    a = (cloud[j] - x) / d[j]
    t = (cloud - x) @ a
    U, V = x + t.min() * a, x + t.max() * a
    if radius is None:
        radius = float(distances_to_line(cloud, x, a).max())
    return CylinderState(U, V, float(radius))


def step_plane(state: CylinderState, p) -> np.ndarray:
    """Orthonormal rows spanning the plane through the axis and ``p``."""
    a = state.direction
    rel = as_vector(p, a.shape[0]) - state.U
    w = rel - (rel @ a) * a
    n = np.linalg.norm(w)
    if n == 0.0:
        raise ValueError("point lies on the axis; the plane is undetermined")
    return np.vstack([a, w / n])


def _violator(state: CylinderState, cloud: np.ndarray) -> tuple[int, float]:
    d = state.distances(cloud)
    i = int(np.argmax(d))
    return i, float(d[i])


def mincyn_step(state: CylinderState, cloud, eps: float, guess: tuple[MeshGuess, MeshGuess]) -> CylinderState:
    """Move the anchors to the guessed mesh nodes.

    The guesses must use the plane through the axis and the current worst
    violator, anchored at ``U_i`` and ``V_i``, with offsets inside the
    radius-5 disk. A guess that collapses the axis raises ``ValueError``.
    """
    cloud = as_cloud(cloud)
    _check_eps(eps)
    r = state.radius
    i, viol = _violator(state, cloud)
    if viol <= (1 + eps) * r:
        raise ValueError("no point violates the current cylinder")
    basis = step_plane(state, cloud[i])
    spacing = mesh_spacing(eps) * r
    for g, origin in zip(guess, (state.U, state.V)):
        if not np.allclose(g.basis, basis, atol=1e-9) or not np.allclose(g.origin, origin, atol=1e-12 * max(1.0, r)):
            raise ValueError("guess does not lie on the mesh of the current step")
        if not math.isclose(g.spacing, spacing, rel_tol=1e-12):
            raise ValueError("guess mesh spacing differs from eps * r / 8")
        if math.hypot(*g.offset) * mesh_spacing(eps) > MESH_RADIUS + 1e-12:
            raise ValueError(f"offset {g.offset} lies outside the anchor disk")
    return CylinderState(guess[0].point, guess[1].point, r)


# --------------------------------------------------------------------------
# candidate anchors and admissible pairs, in plane coordinates scaled by r


def _lattice(origin: np.ndarray, lo: np.ndarray, hi: np.ndarray, g: float, R: int) -> np.ndarray:
    """Integer offsets ``(j, k)`` in the disk of radius ``R`` whose nodes fall in the box ``[lo, hi]``."""
    jlo, jhi = max(-R, math.ceil((lo[0] - origin[0]) / g)), min(R, math.floor((hi[0] - origin[0]) / g))
    klo, khi = max(-R, math.ceil((lo[1] - origin[1]) / g)), min(R, math.floor((hi[1] - origin[1]) / g))
    if jlo > jhi or klo > khi:
        return np.empty((0, 2), dtype=int)
    jj, kk = np.meshgrid(np.arange(jlo, jhi + 1), np.arange(klo, khi + 1), indexing="ij")
    off = np.column_stack([jj.ravel(), kk.ravel()])
    return off[off[:, 0] ** 2 + off[:, 1] ** 2 <= R * R]


def _ray_feasible(A: np.ndarray, hull: np.ndarray, rho: float) -> np.ndarray:
    """Whether some ray from each ``A`` passes within ``rho`` of every hull vertex.

    Each vertex farther than ``rho`` admits an arc of ray directions of
    half-width ``asin(rho / dist) < pi/2``. The arcs are intersected
    relative to the arc of the farthest vertex.
    """
    diff = hull[None, :, :] - A[:, None, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    far = r > rho
    phi = np.arctan2(diff[..., 1], diff[..., 0])
    beta = np.arcsin(np.minimum(1.0, rho / np.maximum(r, rho)))
    ref = np.argmax(r, axis=1)
    rows = np.arange(A.shape[0])
    rel = np.angle(np.exp(1j * (phi - phi[rows, ref][:, None])))
    overlap = np.abs(rel) < beta[rows, ref][:, None] + beta
    lo = np.where(far, rel - beta, -np.inf).max(axis=1)
    hi = np.where(far, rel + beta, np.inf).min(axis=1)
    return ~far.any(axis=1) | ((overlap | ~far).all(axis=1) & (lo <= hi + 1e-12))


def _near_cloud(A: np.ndarray, z: np.ndarray, rho: float, chunk: int = 256) -> np.ndarray:
    ok = np.zeros(A.shape[0], dtype=bool)
    for s in range(0, A.shape[0], chunk):
        diff = A[s : s + chunk, None, :] - z[None, :, :]
        ok[s : s + chunk] = (np.einsum("ijk,ijk->ij", diff, diff) <= rho * rho).any(axis=1)
    return ok


def _segment_fit(A: np.ndarray, B: np.ndarray, hull: np.ndarray) -> np.ndarray:
    """Largest distance from a hull vertex to each segment ``A[a] B[b]``, shape (len(A), len(B))."""
    AB = B[None, :, None, :] - A[:, None, None, :]
    AZ = hull[None, None, :, :] - A[:, None, None, :]
    len2 = np.einsum("abik,abik->abi", AB, AB)
    t = np.clip(np.einsum("abik,abzk->abz", AB, AZ) / np.where(len2 > 0, len2, 1.0), 0.0, 1.0)
    diff = AZ - t[..., None] * AB
    return np.sqrt(np.einsum("abzk,abzk->abz", diff, diff).max(axis=2))


@dataclass
class _StepMesh:
    """Mesh and admissible pairs for one step, in plane coordinates scaled by ``r``."""

    basis: np.ndarray
    u_off: np.ndarray
    v_off: np.ndarray
    pairs: np.ndarray
    fit: np.ndarray


def _plane_coords(cloud, state, basis):
    return (cloud - state.U) @ basis.T / state.radius


def _step_mesh(cloud: np.ndarray, state: CylinderState, basis: np.ndarray, eps: float, chunk: int = 64) -> _StepMesh:
    z = _plane_coords(cloud, state, basis)
    hull = z[convex_hull_2d(z)]
    g = mesh_spacing(eps)
    R = int(math.floor(MESH_RADIUS / g + 1e-9))
    rho = 1.0 + eps * math.sqrt(2.0) / 16 + 1e-9
    box_lo, box_hi = z.min(axis=0) - rho, z.max(axis=0) + rho
    L = float(np.linalg.norm(state.V - state.U)) / state.radius
    origins = (np.zeros(2), np.array([L, 0.0]))
    offs, nodes = [], []
    for o in origins:
        off = _lattice(o, box_lo, box_hi, g, R)
        pts = o + g * off
        keep = _ray_feasible(pts, hull, rho) if len(pts) else np.zeros(0, bool)
        off, pts = off[keep], pts[keep]
        keep = _near_cloud(pts, z, rho) if len(pts) else np.zeros(0, bool)
        offs.append(off[keep])
        nodes.append(pts[keep])
    (ua, va), (A, B) = offs, nodes
    pairs, fits = [], []
    min_move = eps - eps * math.sqrt(2.0) / 16
    move_a = np.hypot(*(A - origins[0]).T) if len(A) else np.zeros(0)
    move_b = np.hypot(*(B - origins[1]).T) if len(B) else np.zeros(0)
    for s in range(0, len(A), chunk):
        fit = _segment_fit(A[s : s + chunk], B, hull)
        distinct = np.hypot(*(A[s : s + chunk, None, :] - B[None, :, :]).transpose(2, 0, 1)) > 1e-12
        moved = (move_a[s : s + chunk, None] >= min_move) | (move_b[None, :] >= min_move)
        ia, ib = np.nonzero((fit <= rho) & distinct & moved)
        pairs.append(np.column_stack([ia + s, ib]))
        fits.append(fit[ia, ib])
    pairs_arr = np.vstack(pairs) if pairs else np.empty((0, 2), dtype=int)
    fit_arr = np.concatenate(fits) if fits else np.empty(0)
    return _StepMesh(basis, ua, va, pairs_arr, fit_arr)


def admissible_pairs(state: CylinderState, cloud, eps: float) -> tuple[np.ndarray, list[tuple[tuple[int, int], tuple[int, int]]]]:
    """Basis of the current step plane and its admissible offset pairs, in canonical order."""
    cloud = as_cloud(cloud)
    i, _ = _violator(state, cloud)
    basis = step_plane(state, cloud[i])
    m = _step_mesh(cloud, state, basis, eps)
    return basis, [(tuple(map(int, m.u_off[a])), tuple(map(int, m.v_off[b]))) for a, b in m.pairs]


def _nearest_node(target2: np.ndarray, origin2: np.ndarray, g: float, R: int) -> tuple[int, int]:
    """Mesh offset closest to ``target2`` among nodes within the anchor disk."""
    rel = (target2 - origin2) / g
    cands = [(j, k) for j in (math.floor(rel[0]), math.ceil(rel[0])) for k in (math.floor(rel[1]), math.ceil(rel[1]))]
    cands = [c for c in cands if c[0] ** 2 + c[1] ** 2 <= R * R]
    if not cands:
        off = _lattice(origin2, origin2 - MESH_RADIUS, origin2 + MESH_RADIUS, g, R)
        cands = [tuple(map(int, c)) for c in off]
    d2 = [(j - rel[0]) ** 2 + (k - rel[1]) ** 2 for j, k in cands]
    return cands[int(np.argmin(d2))]


def _uniform_disk_offset(rng: np.random.Generator, R: int) -> tuple[int, int]:
    while True:
        j, k = (int(x) for x in rng.integers(-R, R + 1, 2))
        if j * j + k * k <= R * R:
            return j, k


def _match_hidden(state: CylinderState, hidden) -> tuple[np.ndarray, np.ndarray]:
    """Order the planted anchors so that they pair with ``U_0`` and ``V_0`` at least total distance."""
    hu, hv = (as_vector(h, state.U.shape[0]) for h in hidden)
    keep = np.linalg.norm(state.U - hu) + np.linalg.norm(state.V - hv)
    swap = np.linalg.norm(state.U - hv) + np.linalg.norm(state.V - hu)
    return (hu, hv) if keep <= swap else (hv, hu)


def _guess(state, basis, eps, offsets) -> tuple[MeshGuess, MeshGuess]:
    spacing = mesh_spacing(eps) * state.radius
    return (
        MeshGuess(state.U, basis, offsets[0], spacing),
        MeshGuess(state.V, basis, offsets[1], spacing),
    )


def mincyn_solve(
    cloud,
    r_guess: float,
    eps: float,
    strategy: str = "randomized",
    restarts: int = 256,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    hidden=None,
    iter_cap: int | None = None,
    start: CylinderState | None = None,
    prune: bool = False,
) -> CylinderResult:
    """Cover the cloud by a cylinder of radius ``(1 + eps) * r_guess``.

    Stops Covered when no point is farther than ``(1 + eps) r_guess`` from
    the axis and CapExceeded after ``iter_cap`` (default ``ceil(4/eps**2)``)
    steps on every attempt. ``hidden`` is the planted ``(U, V)`` pair. It
    is required by ``oracle-guided`` and, when given, the potential and
    the anchor distances are recorded for every strategy.

    ``prune`` makes the randomized strategy sample admissible pairs only;
    the exhaustive strategy always enumerates admissible pairs.

    Trace rows hold the violator, its distance beyond the radius guess
    (in units of ``r_guess``), the potential before the step (NaN without
    ``hidden``) and the chosen offsets.
    """
    cloud = as_cloud(cloud)
    _check_eps(eps)
    if not r_guess > 0:
        raise ValueError("radius guess must be positive")
    if strategy == "oracle_guided":
        strategy = "oracle-guided"
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if strategy == "oracle-guided" and hidden is None:
        raise ValueError("oracle-guided strategy needs the planted anchors")
    if iter_cap is None:
        iter_cap = default_iter_cap(eps)
    init = mincyn_init(cloud)
    state0 = CylinderState(init.U, init.V, float(r_guess)) if start is None else CylinderState(start.U, start.V, float(r_guess))
    target = None if hidden is None else _match_hidden(state0, hidden)
    r = float(r_guess)
    limit = (1 + eps) * r
    g = mesh_spacing(eps)
    R = int(math.floor(MESH_RADIUS / g + 1e-9))

    def potential(state):
        if target is None:
            return math.nan, (math.nan, math.nan)
        du = float(np.linalg.norm(state.U - target[0])) / r
        dv = float(np.linalg.norm(state.V - target[1])) / r
        return du * du + dv * dv, (du, dv)

    def finish(status, path, nodes, used):
        states, rows, guesses = path["states"], path["rows"], path["guesses"]
        final = states[-1]
        d = final.distances(cloud)
        trace = ConvergenceTrace(CYLINDER_COLUMNS, status=status)
        for row in rows:
            trace.add(**row)
        pots = [potential(s) for s in states]
        return CylinderResult(
            status,
            final,
            trace,
            [row["violator_index"] for row in rows],
            float(d.max()) / r - 1.0,
            float(d.max()),
            list(guesses),
            [p for p, _ in pots],
            [ad for _, ad in pots],
            nodes,
            used,
        )

    def row(k, i, viol, state, offsets):
        return {
            "iteration": k,
            "violator_index": i,
            "max_violation": viol / r - 1.0,
            "potential": potential(state)[0],
            "u_offset": offsets[0],
            "v_offset": offsets[1],
        }

    best = {"viol": math.inf, "path": None}
    meshes: dict[bytes, _StepMesh] = {}

    def step_mesh(state, basis):
        # restarts share their opening steps, so meshes are memoised per state
        key = state.U.tobytes() + state.V.tobytes()
        if key not in meshes:
            if len(meshes) >= 4096:
                meshes.clear()
            meshes[key] = _step_mesh(cloud, state, basis, eps)
        return meshes[key]

    def remember(viol, states, rows, guesses):
        if viol < best["viol"]:
            best.update(viol=viol, path={"states": list(states), "rows": list(rows), "guesses": list(guesses)})

    if strategy in ("oracle-guided", "randomized"):
        nodes = 0
        attempts = 1 if strategy == "oracle-guided" else restarts
        for k in range(attempts):
            rng = np.random.default_rng([seed, k])
            states, rows, guesses = [state0], [], []
            while True:
                state = states[-1]
                nodes += 1
                i, viol = _violator(state, cloud)
                remember(viol, states, rows, guesses)
                path = {"states": states, "rows": rows, "guesses": guesses}
                if viol <= limit:
                    return finish(Status.COVERED, path, nodes, k + 1)
                if len(guesses) == iter_cap:
                    break
                basis = step_plane(state, cloud[i])
                if strategy == "oracle-guided":
                    th = [(t - state.U) @ basis.T / r for t in target]
                    L = float(np.linalg.norm(state.V - state.U)) / r
                    offsets = (_nearest_node(th[0], np.zeros(2), g, R), _nearest_node(th[1], np.array([L, 0.0]), g, R))
                    if offsets[0] == (0, 0) and offsets[1] == (0, 0):
                        break
                elif prune:
                    mesh = step_mesh(state, basis)
                    if len(mesh.pairs) == 0:
                        break
                    a, b = mesh.pairs[int(rng.integers(len(mesh.pairs)))]
                    offsets = (tuple(map(int, mesh.u_off[a])), tuple(map(int, mesh.v_off[b])))
                else:
                    offsets = (_uniform_disk_offset(rng, R), _uniform_disk_offset(rng, R))
                try:
                    nxt = mincyn_step(state, cloud, eps, _guess(state, basis, eps, offsets))
                except ValueError:
                    break
                rows.append(row(len(guesses) + 1, i, viol, state, offsets))
                guesses.append(offsets)
                states.append(nxt)
        return finish(Status.CAP_EXCEEDED, best["path"], nodes, attempts)

    # exhaustive: depth first over admissible pairs, best in-plane fit first
    nodes = 0
    frames = [{"state": state0, "children": None, "next": 0, "row": None, "offsets": None}]
    while frames and nodes < budget:
        top = frames[-1]
        states = [f["state"] for f in frames]
        rows = [f["row"] for f in frames[1:]]
        guesses = [f["offsets"] for f in frames[1:]]
        if top["children"] is None:
            nodes += 1
            state = top["state"]
            i, viol = _violator(state, cloud)
            remember(viol, states, rows, guesses)
            if viol <= limit:
                return finish(Status.COVERED, {"states": states, "rows": rows, "guesses": guesses}, nodes, 0)
            if len(frames) - 1 == iter_cap:
                frames.pop()
                continue
            basis = step_plane(state, cloud[i])
            mesh = step_mesh(state, basis)
            order = np.argsort(mesh.fit, kind="stable")
            top["children"] = [(tuple(map(int, mesh.u_off[a])), tuple(map(int, mesh.v_off[b]))) for a, b in mesh.pairs[order]]
            top.update(basis=basis, violator=(i, viol))
        if top["next"] >= len(top["children"]):
            frames.pop()
            continue
        offsets = top["children"][top["next"]]
        top["next"] += 1
        state = top["state"]
        nxt = mincyn_step(state, cloud, eps, _guess(state, top["basis"], eps, offsets))
        i, viol = top["violator"]
        frames.append({"state": nxt, "children": None, "next": 0, "row": row(len(frames), i, viol, state, offsets), "offsets": offsets})
    return finish(Status.CAP_EXCEEDED, best["path"], nodes, 0)


@dataclass
class RadiusSearchResult:
    status: Status
    state: CylinderState
    radius: float
    covering_radius: float
    result: CylinderResult | None
    tries: list[dict] = field(default_factory=list)


def init_bracket(cloud) -> tuple[float, float]:
    """``[m / 4, m]`` with ``m`` the largest distance from the initial axis.

    Every point lies within ``4 r_opt`` of the initial axis, so the optimum
    is at least ``m / 4``; radius ``m`` covers at once.
    """
    cloud = as_cloud(cloud)
    init = mincyn_init(cloud)
    m = float(init.distances(cloud).max())
    return m / INIT_BOUND, m


def mincyn_radius_search(
    cloud,
    eps: float,
    strategy: str = "randomized",
    restarts: int = 256,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    hidden=None,
    iter_cap: int | None = None,
    prune: bool = False,
) -> RadiusSearchResult:
    """Smallest Covered radius guess over a geometric bisection of the initial bracket.

    The bracket is narrowed until its ends are within a factor
    ``1 + eps/4``. ``radius`` is the guess; ``covering_radius`` is the
    actual largest distance to the returned axis, at most ``(1 + eps)``
    times the guess.
    """
    cloud = as_cloud(cloud)
    _check_eps(eps)
    init = mincyn_init(cloud)
    lo, hi = init_bracket(cloud)
    if hi == 0.0:
        return RadiusSearchResult(Status.COVERED, CylinderState(init.U, init.V, 0.0), 0.0, 0.0, None)
    tries: list[dict] = []
    best_state, best_cover, best_res = CylinderState(init.U, init.V, hi), hi, None
    while hi / lo > 1.0 + eps / 4:
        mid = math.sqrt(lo * hi)
        res = mincyn_solve(cloud, mid, eps, strategy, restarts, seed, budget, hidden, iter_cap, prune=prune)
        tries.append({"radius": mid, "status": res.status.value, "iterations": res.iterations, "restarts": res.restarts})
        if res.status is Status.COVERED:
            hi, best_state, best_cover, best_res = mid, res.state, res.covering_radius, res
        else:
            lo = mid
    return RadiusSearchResult(Status.COVERED, best_state, hi, best_cover, best_res, tries)
