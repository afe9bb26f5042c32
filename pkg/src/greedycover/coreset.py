"""Constructive core-sets for translation-only covering.

Run the translation solver at a scale just too small to ever succeed;
the points it is forced to chase during ``ceil(1/eps**2) + 1`` moves form
the core-set. If their own minimum enclosing shape were no larger than
that scale, the solver would have stopped early on them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geom import as_cloud, reference_diameter
from .mincon import default_iter_cap, mincon_fixed_scale, mincon_scale_search, scale_bracket
from .shapes import TranslatableShape
from .trace import Status


@dataclass
class CoreSet:
    indices: list[int]
    eps: float
    shape_kind: str
    failing_scale: float = 0.0
    r_scale: float = 0.0

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def size_bound(self) -> int:
        return default_iter_cap(self.eps)

    def to_text(self) -> str:
        return "".join(f"{i}\n" for i in self.indices)


@dataclass
class Certificate:
    ok: bool
    margin: float
    max_violation: float
    fit_scale: float
    fit_translation: np.ndarray

    def summary(self, core: CoreSet) -> str:
        return json.dumps(
            {
                "size": len(core),
                "eps": core.eps,
                "shape": core.shape_kind,
                "certificate_ok": self.ok,
                "certificate_margin": self.margin,
            },
            indent=2,
        )


def _dedupe(seq) -> list[int]:
    seen: dict[int, None] = {}
    for i in seq:
        seen.setdefault(int(i), None)
    return list(seen)


def extract_coreset(cloud, shape: TranslatableShape, eps: float, max_bisections: int = 64) -> CoreSet:
    """Core-set from the violators visited at the largest failing scale found.

    The failing/covering bracket is narrowed geometrically until the two
    scales are within a factor ``1 + eps/4``.
    """
    cloud = as_cloud(cloud)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    D = reference_diameter(cloud)
    if D == 0.0:
        return CoreSet([0], eps, shape.kind)
    cap = default_iter_cap(eps)

    def run(scale):
        return mincon_fixed_scale(cloud, shape.with_pose(scale=scale), eps, iter_cap=cap, r_scale=D, record_path=False)

    lo, hi = scale_bracket(cloud, shape)
    failing = run(lo)
    for _ in range(max_bisections):
        if failing.status is Status.CAP_EXCEEDED:
            break
        lo /= 2.0
        failing = run(lo)
    else:
        raise RuntimeError("no failing scale found")
    if hi is None:
        hi = 2.0 * lo
        while run(hi).status is not Status.COVERED:
            hi *= 2.0
    for _ in range(max_bisections):
        if hi / lo <= 1.0 + eps / 4:
            break
        mid = math.sqrt(lo * hi)
        res = run(mid)
        if res.status is Status.COVERED:
            hi = mid
        else:
            lo, failing = mid, res
    return CoreSet(_dedupe(failing.visited), eps, shape.kind, lo, D)


def certify_coreset(cloud, core: CoreSet, shape: TranslatableShape, fit_eps: float | None = None) -> Certificate:
    """Check that the enclosing shape of the core-set, grown by ``eps``, covers the cloud.

    The core-set's enclosing shape is fitted by the scale search at
    ``fit_eps`` (default ``eps/20``); the cloud passes when no point lies
    more than ``eps * r_scale`` outside it.
    """
    cloud = as_cloud(cloud)
    sub = cloud[core.indices]
    r_scale = core.r_scale or reference_diameter(cloud) or 1.0
    fit = mincon_scale_search(sub, shape, fit_eps or core.eps / 20)
    if fit.shape is None:
        v = np.linalg.norm(cloud - fit.translation, axis=1)
    else:
        v = fit.shape.violations(cloud, core.eps * r_scale / 10)
    worst = float(v.max())
    margin = core.eps * r_scale - worst
    return Certificate(margin >= 0, margin, worst, fit.scale, fit.translation)
