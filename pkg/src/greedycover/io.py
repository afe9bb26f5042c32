"""Instance and report files.

An instance is a headerless CSV of points (one row per point, floats
written with ``repr`` so they round-trip exactly) plus an optional JSON
sidecar with the same stem describing how it was generated and its
planted optimum. Reports are JSON documents with sorted keys.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


class InstanceFormatError(ValueError):
    """A points file could not be parsed."""


def format_float(x: float) -> str:
    return repr(float(x))


def write_points(path, points) -> None:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    Path(path).write_text(points_to_csv(pts))


def points_to_csv(points) -> str:
    return "".join(",".join(format_float(v) for v in row) + "\n" for row in np.atleast_2d(points))


def read_points(path) -> np.ndarray:
    """Read a headerless CSV; malformed rows raise :class:`InstanceFormatError` naming the row."""
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                values = [float(c) for c in row]
            except ValueError:
                raise InstanceFormatError(f"{path}: row {lineno}: non-numeric value in {row!r}") from None
            if not all(math.isfinite(v) for v in values):
                raise InstanceFormatError(f"{path}: row {lineno}: non-finite value")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise InstanceFormatError(f"{path}: row {lineno}: expected {width} columns, found {len(values)}")
            rows.append(values)
    if not rows:
        raise InstanceFormatError(f"{path}: no points")
    return np.array(rows, dtype=float)


def sidecar_path(points_path) -> Path:
    return Path(points_path).with_suffix(".json")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats, non-finite floats as strings."""
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_sidecar(points_path) -> dict | None:
    p = sidecar_path(points_path)
    if not p.exists():
        return None
    return json.loads(p.read_text())


def write_instance(path, instance) -> Path:
    """Write the points CSV and its sidecar; returns the sidecar path."""
    write_points(path, instance.points)
    meta = {
        "dim": instance.dim,
        "n": instance.n,
        "kind": instance.kind,
        "seed": instance.seed,
        "planted": instance.planted,
    }
    side = sidecar_path(path)
    write_json(side, meta)
    return side
