"""Command line interface: ``greedycover gen | solve | oracle | compare``.

Exit codes: 0 when the solve ends Covered, 2 when it ends CapExceeded or
Infeasible, 1 on any error (bad flags, unreadable input, ...).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import coreset, instances, io, meb, mincon, mincyn, oracle, rotation
from .shapes import AngularProfile, UnionShape, make_shape
from .trace import Status

ALGORITHMS = ("meb", "mebopt", "mincon", "union", "coreset", "minrot", "fullrot", "mincyn")
ORACLES = ("exact-meb-2d", "grid-translation", "direction-grid-cylinder", "rotation-grid")
COMPARE_ORACLE = {
    "meb": "exact-meb-2d",
    "mebopt": "exact-meb-2d",
    "mincon": "grid-translation",
    "minrot": "rotation-grid",
    "fullrot": "rotation-grid",
    "mincyn": "direction-grid-cylinder",
}
STRATEGIES = {
    "union": ("exhaustive", "randomized"),
    "fullrot": ("exhaustive", "randomized", "oracle-guided"),
    "mincyn": ("exhaustive", "randomized", "oracle-guided"),
}
DEFAULT_RESTARTS = {"union": 32, "fullrot": 64, "mincyn": 256}
EXIT_CODES = {Status.COVERED: 0, Status.CAP_EXCEEDED: 2, Status.INFEASIBLE: 2}


class CliError(Exception):
    """User-facing failure; reported on stderr with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _eps(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"eps must be a number, got {text!r}") from None
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError(f"eps must lie in (0, 1), got {text}")
    return x


def _positive(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return x


def _kind_params(text: str) -> tuple[str, list[float]]:
    kind, _, rest = text.partition(":")
    try:
        params = [float(v) for v in rest.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"bad parameter list in {text!r}") from None
    return kind.strip(), params


def _param(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    return key.replace("-", "_"), parsed


# --------------------------------------------------------------------------
# inputs


def _load(args) -> tuple[np.ndarray, dict | None]:
    try:
        cloud = io.read_points(args.input)
    except FileNotFoundError:
        raise CliError(f"input file not found: {args.input}") from None
    except io.InstanceFormatError as exc:
        raise CliError(str(exc)) from None
    return cloud, io.read_sidecar(args.input)


def _planted(meta: dict | None, key: str, what: str):
    if not meta or key not in (meta.get("planted") or {}):
        raise CliError(f"{what} needs --{'shape' if key == 'shape' else 'profile'} or a sidecar with a planted {key}")
    return meta["planted"][key]


def _shape(args, meta, dim):
    if args.shape:
        kind, params = _kind_params(args.shape)
    elif meta and "shape" in (meta.get("planted") or {}):
        kind, params = meta["planted"]["shape"]["kind"], meta["planted"]["shape"]["params"]
    elif args.algorithm == "coreset":
        kind, params = "ball", [1.0]
    else:
        kind, params = _planted(meta, "shape", args.algorithm)
    try:
        return make_shape(kind, params, dim)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _profile(args, meta):
    if args.profile:
        kind, params = _kind_params(args.profile)
    else:
        p = _planted(meta, "profile", args.algorithm)
        kind, params = p["kind"], p["params"]
    try:
        return AngularProfile(kind, tuple(params))
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _union(args, meta, dim):
    items = args.part or []
    if items:
        parts = []
        for item in items:
            body, _, offset = item.partition("@")
            kind, params = _kind_params(body)
            off = [float(v) for v in offset.split(",")] if offset else [0.0] * dim
            parts.append(make_shape(kind, params, dim, translation=off))
    elif meta and "parts" in (meta.get("planted") or {}):
        parts = [make_shape(p["kind"], p["params"], dim, translation=p["offset"]) for p in meta["planted"]["parts"]]
    else:
        raise CliError("union needs --part or a sidecar with planted parts")
    scale = args.scale if args.scale is not None else float((meta or {}).get("planted", {}).get("scale", 1.0))
    return UnionShape(tuple(parts), scale=scale)


def _hidden(meta, keys, algorithm):
    planted = (meta or {}).get("planted") or {}
    if not all(k in planted for k in keys):
        raise CliError(f"oracle-guided {algorithm} needs a sidecar with the planted {', '.join(keys)}")
    return [planted[k] for k in keys]


# --------------------------------------------------------------------------
# solvers


def _cap(default: int, mult: float) -> int:
    return max(1, math.ceil(default * mult))


def _run_solver(args, cloud, meta) -> tuple[dict, object]:
    """Run the chosen algorithm; returns the report body and the trace (or None)."""
    alg, eps, dim = args.algorithm, args.eps, cloud.shape[1]
    mult = args.iter_cap_mult
    strategy = args.strategy
    if args.restarts is None:
        args.restarts = DEFAULT_RESTARTS.get(alg, 0)
    if strategy is not None and strategy not in STRATEGIES.get(alg, ()):
        raise CliError(f"{alg} does not take --strategy {strategy}")
    if alg == "meb":
        if args.radius is not None:
            res = meb.meb_fixed_radius(cloud, args.radius, eps, iter_cap=_cap(math.ceil(meb.ITER_CAP_MULT / eps), mult), record_path=False)
            body = {"status": res.status, "iterations": res.iterations, "radius": args.radius}
        else:
            res = meb.meb_binary_search(cloud, eps, iter_cap_mult=meb.ITER_CAP_MULT * mult)
            body = {"status": res.status, "iterations": res.iterations, "tries": res.tries}
        body.update(center=res.ball.center, covering_radius=res.covering_radius)
        return body, res.trace
    if alg == "mebopt":
        res = meb.mebopt(cloud, eps, inner_const=meb.INNER_CONST * mult)
        body = {"status": res.status, "iterations": res.iterations, "center": res.ball.center, "covering_radius": res.covering_radius, "epochs": res.epochs}
        return body, res.trace
    if alg in ("mincon", "coreset"):
        shape = _shape(args, meta, dim)
        cap = _cap(mincon.default_iter_cap(eps), mult)
        if alg == "coreset":
            core = coreset.extract_coreset(cloud, shape, eps)
            cert = coreset.certify_coreset(cloud, core, shape)
            status = Status.COVERED if cert.ok else Status.CAP_EXCEEDED
            body = {
                "status": status,
                "iterations": len(core),
                "indices": core.indices,
                "size_bound": core.size_bound,
                "certificate_ok": cert.ok,
                "certificate_margin": cert.margin,
                "failing_scale": core.failing_scale,
                "shape": shape.to_dict(),
            }
            return body, None
        if args.scale is not None:
            res = mincon.mincon_fixed_scale(cloud, shape.with_pose(scale=args.scale), eps, iter_cap=cap, record_path=False)
            body = {"status": res.status, "iterations": res.iterations, "scale": args.scale, "translation": res.translation, "max_violation": res.max_violation}
            return body | {"shape": shape.to_dict()}, res.trace
        res = mincon.mincon_scale_search(cloud, shape, eps, iter_cap=cap)
        body = {"status": res.status, "iterations": len(res.trace), "scale": res.scale, "translation": res.translation, "tries": res.tries}
        return body | {"shape": shape.to_dict()}, res.trace
    if alg == "union":
        union = _union(args, meta, dim)
        res = mincon.mincon_union(
            cloud,
            union,
            eps,
            strategy=strategy or "exhaustive",
            restarts=args.restarts,
            seed=args.seed,
            budget=args.budget or mincon.DEFAULT_BUDGET,
            iter_cap=_cap(mincon.default_iter_cap(eps), mult),
        )
        body = {
            "status": res.status,
            "iterations": res.iterations,
            "translation": res.union.translation,
            "scale": res.union.scale,
            "guesses": res.guesses,
            "max_violation": res.max_violation,
            "nodes": res.nodes,
            "restarts": res.restarts,
        }
        return body, res.trace
    if alg in ("minrot", "fullrot"):
        profile = _profile(args, meta)
        cap = _cap(math.ceil(1.0 / eps**2) + 1, mult)
        try:
            if alg == "minrot":
                normal = ((meta or {}).get("planted") or {}).get("halfspace_normal")
                half = rotation.HalfSpaceConstraint(normal) if normal is not None else None
                res = rotation.minrot(cloud, profile, eps, half=half, iter_cap=cap)
            else:
                strategy = strategy or "randomized"
                hidden = _hidden(meta, ["axis"], alg)[0] if strategy == "oracle-guided" else None
                res = rotation.fullrot(
                    cloud,
                    profile,
                    eps,
                    strategy=strategy,
                    restarts=args.restarts,
                    seed=args.seed,
                    budget=args.budget or rotation.DEFAULT_BUDGET,
                    hidden_axis=hidden,
                    iter_cap=cap,
                )
        except ValueError as exc:
            raise CliError(str(exc)) from None
        body = {
            "status": res.status,
            "iterations": res.iterations,
            "axis": res.axis,
            "max_violation": res.max_violation,
            "profile": profile.to_dict(),
            "guesses": res.guesses,
            "nodes": res.nodes,
            "restarts": res.restarts,
        }
        return body, res.trace
    if alg == "mincyn":
        strategy = strategy or "randomized"
        hidden = _hidden(meta, ["U", "V"], alg) if strategy == "oracle-guided" else None
        kwargs = dict(restarts=args.restarts, seed=args.seed, budget=args.budget or mincyn.DEFAULT_BUDGET, hidden=hidden)
        cap = _cap(mincyn.default_iter_cap(eps), mult)
        try:
            if args.radius is not None:
                res = mincyn.mincyn_solve(cloud, args.radius, eps, strategy, iter_cap=cap, **kwargs)
                body = {"status": res.status, "iterations": res.iterations, "radius": args.radius, "covering_radius": res.covering_radius}
                body.update(res.state.to_dict(), nodes=res.nodes, restarts=res.restarts)
                return body, res.trace
            rs = mincyn.mincyn_radius_search(cloud, eps, strategy, iter_cap=cap, **kwargs)
        except ValueError as exc:
            raise CliError(str(exc)) from None
        body = {"status": rs.status, "iterations": rs.result.iterations if rs.result else 0}
        body.update(rs.state.to_dict(), radius=rs.radius, covering_radius=rs.covering_radius, tries=rs.tries)
        return body, rs.result.trace if rs.result else None
    raise CliError(f"unknown algorithm {alg!r}")


def _report(kind: str, name: str, args, body: dict, wall: float) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output", "trace")}
    return {kind: name, **body, "eps": getattr(args, "eps", None), "seed": getattr(args, "seed", None), "config": config, "wall_time": wall}


def _emit(args, report: dict) -> None:
    text = io.dumps(report)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    cloud, meta = _load(args)
    t0 = time.perf_counter()
    body, trace = _run_solver(args, cloud, meta)
    wall = time.perf_counter() - t0
    if args.trace and trace is not None:
        trace.write_csv(args.trace)
    report = _report("algorithm", args.algorithm, args, body, wall)
    _emit(args, report)
    return EXIT_CODES[Status(body["status"])]


# --------------------------------------------------------------------------
# oracles


def _run_oracle(name: str, args, cloud, meta) -> dict:
    dim = cloud.shape[1]
    try:
        if name == "exact-meb-2d":
            ball = oracle.exact_meb_2d(cloud)
            return {"status": Status.COVERED, "iterations": 0, "center": ball.center, "covering_radius": ball.radius}
        if name == "direction-grid-cylinder":
            res = oracle.direction_grid_cylinder(cloud, args.k or 100_000)
            return {"status": Status.COVERED, "iterations": 0, "axis": res.axis, "point": res.center, "covering_radius": res.radius, "evaluated": res.evaluated}
        if name == "rotation-grid":
            res = oracle.rotation_grid_oracle(cloud, _profile(args, meta), args.k or 20_000)
            return {"status": Status.COVERED, "iterations": 0, "axis": res.axis, "max_violation": res.max_violation}
        if name == "grid-translation":
            shape = _shape(args, meta, dim)
            scale = args.scale if args.scale is not None else 1.0
            step = args.step or _default_step(cloud)
            res = oracle.grid_translation_oracle(cloud, shape, scale, step)
            return {"status": Status.COVERED, "iterations": 0, "translation": res.translation, "scale": scale, "max_violation": res.max_violation, "cells": res.cells, "step": step}
    except ValueError as exc:
        raise CliError(str(exc)) from None
    raise CliError(f"unknown oracle {name!r}")


def _default_step(cloud: np.ndarray) -> float:
    extent = float((cloud.max(axis=0) - cloud.min(axis=0)).max())
    return extent / 200 if extent > 0 else 1.0


def cmd_oracle(args) -> int:
    cloud, meta = _load(args)
    t0 = time.perf_counter()
    body = _run_oracle(args.name, args, cloud, meta)
    _emit(args, _report("algorithm", args.name, args, body, time.perf_counter() - t0))
    return 0


def _oracle_scale(cloud, shape, step: float, start: float) -> float:
    """Smallest scale (to ~1e-3 relative) at which the grid oracle leaves no violation beyond the grid error."""
    slack = step * math.sqrt(cloud.shape[1]) / 2
    covers = lambda s: oracle.grid_translation_oracle(cloud, shape, s, step).max_violation <= slack  # noqa: E731
    hi = start
    while not covers(hi):
        hi *= 2.0
    lo = hi / 2.0
    while covers(lo) and lo > 1e-12:
        lo /= 2.0
    while hi / lo > 1.001:
        mid = math.sqrt(lo * hi)
        lo, hi = (lo, mid) if covers(mid) else (mid, hi)
    return hi


def cmd_compare(args) -> int:
    cloud, meta = _load(args)
    name = COMPARE_ORACLE.get(args.algorithm)
    if name is None:
        raise CliError(f"no oracle to compare {args.algorithm} against")
    dim = cloud.shape[1]
    needed = {"exact-meb-2d": (2,), "grid-translation": (1, 2, 3), "rotation-grid": (3,), "direction-grid-cylinder": (3,)}[name]
    if dim not in needed:
        raise CliError(f"oracle {name} does not support dimension {dim}")
    t0 = time.perf_counter()
    body, _ = _run_solver(args, cloud, meta)
    solver_report = _report("algorithm", args.algorithm, args, body, time.perf_counter() - t0)
    t0 = time.perf_counter()
    if name == "grid-translation":
        shape = _shape(args, meta, dim)
        step = args.step or _default_step(cloud)
        solver_value = float(body["scale"])
        oracle_value = _oracle_scale(cloud, shape, step, solver_value)
        obody = {"status": Status.COVERED, "iterations": 0, "scale": oracle_value, "step": step}
        quantity = "scale"
    else:
        obody = _run_oracle(name, args, cloud, meta)
        quantity = "max_violation" if name == "rotation-grid" else "covering_radius"
        solver_value, oracle_value = float(body[quantity]), float(obody[quantity])
    oracle_report = _report("algorithm", name, args, obody, time.perf_counter() - t0)
    ratio = solver_value / oracle_value if oracle_value > 0 else None
    out = {
        "algorithm": args.algorithm,
        "oracle": name,
        "quantity": quantity,
        "solver_value": solver_value,
        "oracle_value": oracle_value,
        "ratio": ratio,
        "difference": solver_value - oracle_value,
        "solver": solver_report,
        "oracle_report": oracle_report,
    }
    _emit(args, out)
    return EXIT_CODES[Status(body["status"])]


# --------------------------------------------------------------------------
# generation


def cmd_gen(args) -> int:
    params = dict(args.param or [])
    try:
        inst = instances.generate(args.kind, args.n, args.dim, args.seed, **params)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    side = io.write_instance(args.output, inst)
    sys.stderr.write(f"wrote {args.output} and {side}\n")
    return 0


# --------------------------------------------------------------------------


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("algorithm", choices=ALGORITHMS)
    p.add_argument("--input", required=True, help="points CSV; a sidecar JSON with the same stem is read if present")
    p.add_argument("--eps", type=_eps, required=True)
    p.add_argument("--radius", type=_positive, help="fixed radius guess (meb, mincyn)")
    p.add_argument("--scale", type=_positive, help="fixed scale guess (mincon, union)")
    p.add_argument("--strategy", choices=("exhaustive", "randomized", "oracle-guided"))
    p.add_argument("--restarts", type=int, help="restarts for randomized strategies (default: union 32, fullrot 64, mincyn 256)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, help="node budget for exhaustive search")
    p.add_argument("--iter-cap-mult", type=_positive, default=1.0, help="multiplier on the default iteration cap")
    p.add_argument("--shape", help="translatable shape as kind:p1,p2,... (ball, box, ellipsoid, vertex-hull)")
    p.add_argument("--part", action="append", help="union part as kind:params@offset (repeatable)")
    p.add_argument("--profile", help="angular profile as kind:p1,p2 (cone, half-cylinder, full-cylinder, ...)")
    p.add_argument("--output", help="report path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="greedycover", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a planted instance")
    g.add_argument("kind", choices=instances.GENERATOR_KINDS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--param", type=_param, action="append", help="generator parameter key=value (repeatable)")
    g.add_argument("--output", required=True, help="points CSV path; the sidecar gets the .json suffix")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run an approximation algorithm")
    _solver_flags(s)
    s.add_argument("--trace", help="write the per-iteration trace CSV here")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="run a brute-force reference solver")
    o.add_argument("name", choices=ORACLES)
    o.add_argument("--input", required=True)
    o.add_argument("--k", type=int, help="number of grid directions")
    o.add_argument("--step", type=_positive, help="translation grid spacing")
    o.add_argument("--scale", type=_positive)
    o.add_argument("--shape")
    o.add_argument("--profile")
    o.add_argument("--output")
    o.set_defaults(func=cmd_oracle, algorithm="oracle")

    c = sub.add_parser("compare", help="run a solver and its matching oracle")
    _solver_flags(c)
    c.add_argument("--k", type=int, help="number of grid directions")
    c.add_argument("--step", type=_positive, help="translation grid spacing")
    c.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"greedycover: error: {exc}\n")
        return 1
    except (ValueError, RuntimeError, OSError) as exc:
        sys.stderr.write(f"greedycover: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
