"""Acceptance suite: each test checks one criterion at its stated tolerance.

Every test prints a single ``acceptance N: PASS|FAIL`` line (also repeated
in the pytest terminal summary) before asserting.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np
import pytest

from greedycover import cli, instances
from greedycover.coreset import certify_coreset, extract_coreset
from greedycover.meb import meb_binary_search, meb_fixed_radius, mebopt
from greedycover.mincon import mincon_fixed_scale
from greedycover.mincyn import mincyn_init, mincyn_radius_search, mincyn_solve
from greedycover.oracle import direction_grid_cylinder, exact_meb_2d
from greedycover.rotation import HalfSpaceConstraint, fullrot, minrot, normalized_violations
from greedycover.shapes import AngularProfile, make_shape
from greedycover.trace import Status

pytestmark = pytest.mark.slow

SHELL_SEEDS = range(20)
SHELL_EPS = (0.1, 0.05, 0.02)


@pytest.fixture(scope="module")
def shell_instances():
    return [instances.sphere_shell(2000, 50, seed) for seed in SHELL_SEEDS]


@pytest.fixture(scope="module")
def meb_runs(shell_instances):
    runs = []
    for inst in shell_instances:
        for eps in SHELL_EPS:
            t0 = time.perf_counter()
            res = meb_fixed_radius(inst.points, 1.0, eps)
            runs.append((inst, eps, res, time.perf_counter() - t0))
    return runs


def test_meb_iteration_bound(meb_runs, acceptance_line):
    bad = []
    slowest = 0.0
    for inst, eps, res, secs in meb_runs:
        slowest = max(slowest, secs)
        cap = math.ceil(64 / eps)
        if res.status is not Status.COVERED or res.iterations > cap or secs >= 5.0:
            bad.append((inst.seed, eps, res.status.value, res.iterations, secs))
    worst = max(res.iterations * eps for _, eps, res, _ in meb_runs)
    ok = acceptance_line(
        1,
        not bad,
        f"meb_fixed_radius r=1 on {len(meb_runs)} runs: Covered within ceil(64/eps); "
        f"max iterations*eps={worst:.3f}, slowest {slowest:.2f}s; failures={bad}",
    )
    assert ok


def test_meb_potential_decrease(meb_runs, acceptance_line):
    checked = 0
    worst = math.inf
    for inst, _, res, _ in meb_runs:
        center = np.asarray(inst.planted["center"])
        d2 = [float(np.sum((c - center) ** 2)) for c in res.path]
        moves = res.trace.column("move_length")
        assert len(moves) == len(d2) - 1
        for k, m in enumerate(moves):
            worst = min(worst, d2[k] - d2[k + 1] - m * m)
            checked += 1
    ok = acceptance_line(
        2,
        worst >= -1e-9,
        f"{checked} iterations; min of d_i^2 - d_(i+1)^2 - move^2 = {worst:.3e} (tolerance -1e-9)",
    )
    assert ok


def test_mebopt_guarantee(shell_instances, acceptance_line):
    bad = []
    worst_cover = 0.0
    worst_lower = 0.0
    slowest = 0.0
    for inst in shell_instances:
        t0 = time.perf_counter()
        res = mebopt(inst.points, 0.01)
        secs = time.perf_counter() - t0
        slowest = max(slowest, secs)
        lower = max(e["radius"] for e in res.epochs)
        worst_cover = max(worst_cover, res.covering_radius)
        worst_lower = max(worst_lower, lower)
        if res.covering_radius > 1.03 or lower > 1 + 1e-9 or secs >= 10.0:
            bad.append((inst.seed, res.covering_radius, lower, secs))
    ok = acceptance_line(
        3,
        not bad,
        f"mebopt eps=0.01: max covering radius {worst_cover:.5f} (<= 1.03), "
        f"max lower bound {worst_lower:.6f} (<= 1), slowest {slowest:.2f}s; failures={bad}",
    )
    assert ok


def test_meb_oracle_equivalence_2d(acceptance_line):
    rng = np.random.default_rng(2024)
    ratios = []
    for _ in range(50):
        n = int(rng.integers(3, 201))
        cloud = rng.normal(size=(n, 2)) * rng.uniform(0.1, 10.0, 2) + rng.uniform(-5, 5, 2)
        approx = meb_binary_search(cloud, 1e-3)
        exact = exact_meb_2d(cloud)
        ratios.append(approx.covering_radius / exact.radius)
    lo, hi = min(ratios), max(ratios)
    ok = acceptance_line(
        4,
        lo >= 1 - 1e-12 and hi <= 1.001,
        f"50 clouds: radius ratio meb_binary_search/exact in [{lo:.6f}, {hi:.6f}] (target [1, 1.001])",
    )
    assert ok


def test_mincon_bound(acceptance_line):
    bad = []
    worst_slack = math.inf
    runs = 0
    for dim in (5, 20):
        for eps in (0.3, 0.1):
            for seed in range(5):
                inst = instances.box(500, dim, seed)
                t_star = np.asarray(inst.planted["translation"])
                shape = make_shape("box", inst.planted["shape"]["params"], dim)
                res = mincon_fixed_scale(inst.points, shape, eps)
                runs += 1
                tol_proj = eps * res.r_scale / 10
                v2 = [float(np.sum((t_star - t) ** 2)) for t in res.path]
                moves = res.trace.column("move_length")
                slack = min((v2[k] - v2[k + 1] - m * m + 10 * tol_proj for k, m in enumerate(moves)), default=math.inf)
                worst_slack = min(worst_slack, slack)
                cap = math.ceil(1 / eps**2) + 1
                final = res.max_violation / res.r_scale
                if res.status is not Status.COVERED or res.iterations > cap or final > eps or slack < 0:
                    bad.append((dim, eps, seed, res.status.value, res.iterations, final, slack))
    ok = acceptance_line(
        5,
        not bad,
        f"{runs} box runs d in {{5,20}}, eps in {{0.3,0.1}}: Covered within ceil(1/eps^2)+1, "
        f"min potential slack {worst_slack:.3e} (>= 0 with 10*tol_proj); failures={bad}",
    )
    assert ok


def test_coreset_size_and_certificate(acceptance_line):
    results = []
    for seed in range(10):
        inst = instances.sphere_shell(2000, 50, seed)
        core = extract_coreset(inst.points, make_shape("ball", [1.0], 50), 0.2)
        cert = certify_coreset(inst.points, core, make_shape("ball", [1.0], 50))
        results.append((seed, len(core), cert.ok, cert.margin))
    good = sum(1 for _, size, ok, _ in results if size <= 26 and ok)
    ok = acceptance_line(
        6,
        good == 10,
        f"core-sets eps=0.2: {good}/10 seeds with |T| <= 26 and certified; "
        f"sizes {[r[1] for r in results]}",
    )
    assert ok


def test_minrot_bound_and_potential(acceptance_line):
    eps = 0.1
    cap = math.ceil(1 / eps**2) + 1
    bad = []
    worst = math.inf
    for seed in range(10):
        inst = instances.cone(500, 8, seed)
        profile = AngularProfile("cone", tuple(inst.planted["profile"]["params"]))
        u_star = np.asarray(inst.planted["axis"])
        half = HalfSpaceConstraint(inst.planted["halfspace_normal"])
        res = minrot(inst.points, profile, eps, half=half)
        d2 = [float(np.sum((u - u_star) ** 2)) for u in res.path]
        viol = res.trace.column("violation")
        slack = min((d2[k] - d2[k + 1] - v * v for k, v in enumerate(viol)), default=math.inf)
        worst = min(worst, slack)
        if res.status is not Status.COVERED or res.iterations > cap or slack < -1e-6:
            bad.append((seed, res.status.value, res.iterations, slack))
    ok = acceptance_line(
        7,
        not bad,
        f"minrot cone d=8 eps=0.1, 10 seeds: Covered within {cap}; "
        f"min spherical potential slack {worst:.3e} (>= -1e-6); failures={bad}",
    )
    assert ok


def test_fullrot_strategies(acceptance_line):
    eps = 0.3
    cap = math.ceil(1 / eps**2) + 1
    oracle_ok = 0
    random_ok = 0
    false_covered = []
    bad_failure = []
    for seed in range(10):
        inst = instances.cylinder(400, 5, seed, through_origin=True)
        profile = AngularProfile("full-cylinder", tuple(inst.planted["profile"]["params"]))
        rho_max = float(np.linalg.norm(inst.points, axis=1).max())
        og = fullrot(inst.points, profile, eps, strategy="oracle-guided", hidden_axis=inst.planted["axis"])
        if og.status is Status.COVERED and og.iterations <= cap:
            oracle_ok += 1
        rnd = fullrot(inst.points, profile, eps, strategy="randomized", restarts=64, seed=seed)
        actual = float(normalized_violations(profile, inst.points, rnd.axis, rho_max).max())
        if rnd.status is Status.COVERED:
            if actual > eps + 1e-12:
                false_covered.append((seed, actual))
            else:
                random_ok += 1
        elif rnd.status is not Status.CAP_EXCEEDED:
            bad_failure.append((seed, rnd.status.value))
    ok = acceptance_line(
        8,
        oracle_ok == 10 and random_ok >= 9 and not false_covered and not bad_failure,
        f"fullrot d=5 eps=0.3: oracle-guided {oracle_ok}/10 within {cap}, randomized(64) {random_ok}/10; "
        f"false Covered {false_covered}, non-CapExceeded failures {bad_failure}",
    )
    assert ok


def test_mincyn(acceptance_line):
    eps = 0.25
    min_drop = math.inf
    max_anchor = 0.0
    steps = 0
    search_radius = 0.0
    random_ok = 0
    grid = []
    slowest = 0.0
    problems = []
    for seed in range(10):
        t0 = time.perf_counter()
        inst = instances.cylinder(400, 3, seed, half_length=1.0)
        hidden = (inst.planted["U"], inst.planted["V"])
        og = mincyn_solve(inst.points, 1.0, eps, strategy="oracle-guided", hidden=hidden)
        if og.status is not Status.COVERED:
            problems.append(("oracle-guided", seed, og.status.value))
        pots = og.potentials
        for k in range(len(pots) - 1):
            min_drop = min(min_drop, pots[k] - pots[k + 1])
            steps += 1
        max_anchor = max(max_anchor, max(max(du, dv) for du, dv in og.anchor_distances))
        search = mincyn_radius_search(inst.points, eps, strategy="oracle-guided", hidden=hidden)
        search_radius = max(search_radius, search.radius, search.covering_radius)
        rnd = mincyn_radius_search(inst.points, eps, strategy="randomized", restarts=256, seed=seed)
        if rnd.covering_radius <= 1.25:
            random_ok += 1
        grid.append(direction_grid_cylinder(inst.points, k=100_000).radius)
        slowest = max(slowest, time.perf_counter() - t0)
    ok = (
        not problems
        and min_drop >= eps**2 / 2 - 1e-9
        and max_anchor <= 5.0
        and search_radius <= 1.25
        and random_ok >= 8
        and all(1.0 <= r <= 1.01 for r in grid)
        and slowest < 60.0
    )
    acceptance_line(
        9,
        ok,
        f"mincyn d=3 eps=0.25: {steps} oracle-guided steps, min potential drop {min_drop:.4f} (>= {eps**2 / 2}), "
        f"max anchor distance {max_anchor:.3f} (<= 5); radius search <= {search_radius:.4f} (<= 1.25); "
        f"randomized(256) {random_ok}/10; grid radii [{min(grid):.5f}, {max(grid):.5f}] (in [1, 1.01]); "
        f"slowest seed {slowest:.1f}s; problems={problems}",
    )
    assert ok


def test_initial_axis_bound(acceptance_line):
    worst = 0.0
    count = 0
    configs = [
        dict(dim=3, half_length=1.0),
        dict(dim=3, half_length=4.0),
        dict(dim=5, half_length=1.0, through_origin=True),
        dict(dim=10, half_length=1.0),
        dict(dim=3, half_length=0.1),
        dict(dim=6, half_length=2.5, radius=0.3),
    ]
    for cfg in configs:
        dim = cfg.pop("dim")
        for seed in range(10):
            inst = instances.cylinder(300, dim, seed, **cfg)
            init = mincyn_init(inst.points)
            ratio = float(init.distances(inst.points).max()) / inst.planted["radius"]
            worst = max(worst, ratio)
            count += 1
    ok = acceptance_line(
        10,
        worst <= 4 + 1e-9,
        f"{count} planted cylinders: max distance from the initial axis / r_opt = {worst:.4f} (<= 4)",
    )
    assert ok


def _strip_wall_time(text: str) -> str:
    report = json.loads(text)
    report.pop("wall_time", None)
    return json.dumps(report, sort_keys=True)


DETERMINISM_COMMANDS = [
    ("sphere-shell", ["--n", "300", "--dim", "10"], ["meb", "--eps", "0.05", "--radius", "1"]),
    ("sphere-shell", ["--n", "300", "--dim", "10"], ["mebopt", "--eps", "0.01"]),
    ("box", ["--n", "200", "--dim", "5"], ["mincon", "--eps", "0.3"]),
    ("dumbbell-union", ["--n", "200", "--dim", "3"], ["union", "--eps", "0.3", "--strategy", "randomized"]),
    ("sphere-shell", ["--n", "500", "--dim", "20"], ["coreset", "--eps", "0.2", "--shape", "ball:1"]),
    ("cone", ["--n", "300", "--dim", "8"], ["minrot", "--eps", "0.1"]),
    ("cylinder", ["--n", "300", "--dim", "5", "--param", "through_origin=true"], ["fullrot", "--eps", "0.3"]),
    ("cylinder", ["--n", "300", "--dim", "3"], ["mincyn", "--eps", "0.25", "--radius", "1"]),
]


def test_determinism(tmp_path, acceptance_line):
    mismatched = []
    for k, (kind, gen_flags, solve_flags) in enumerate(DETERMINISM_COMMANDS):
        pts = tmp_path / f"inst{k}.csv"
        assert cli.main(["gen", kind, *gen_flags, "--seed", "7", "--output", str(pts)]) == 0
        outputs = []
        for rep in range(2):
            report = tmp_path / f"report{k}_{rep}.json"
            trace = tmp_path / f"trace{k}_{rep}.csv"
            args = ["solve", solve_flags[0], "--input", str(pts), *solve_flags[1:], "--seed", "3"]
            args += ["--output", str(report)]
            if solve_flags[0] != "coreset":
                args += ["--trace", str(trace)]
            code = cli.main(args)
            outputs.append((code, _strip_wall_time(report.read_text()), trace.read_text() if trace.exists() else ""))
        if outputs[0] != outputs[1]:
            mismatched.append(solve_flags[0])
    ok = acceptance_line(
        11,
        not mismatched,
        f"{len(DETERMINISM_COMMANDS)} CLI commands repeated with the same seed: "
        f"reports and traces identical apart from wall time; mismatches={mismatched}",
    )
    assert ok
