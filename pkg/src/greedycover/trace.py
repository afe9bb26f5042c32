"""Per-iteration solver records and their CSV form."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from typing import Any


class Status(str, enum.Enum):
    COVERED = "Covered"
    CAP_EXCEEDED = "CapExceeded"
    INFEASIBLE = "Infeasible"

    def __str__(self) -> str:
        return self.value


MEB_COLUMNS = ("iteration", "violator_index", "move_length", "max_violation")
ROTATION_COLUMNS = ("iteration", "violator_index", "theta", "guess", "violation")
CYLINDER_COLUMNS = ("iteration", "violator_index", "max_violation", "potential", "u_offset", "v_offset")


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return " ".join(_fmt(v) for v in value)
    return str(value)


@dataclass
class ConvergenceTrace:
    columns: tuple[str, ...] = MEB_COLUMNS
    records: list[dict[str, Any]] = field(default_factory=list)
    status: Status | None = None

    def add(self, **row: Any) -> None:
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown trace columns: {sorted(unknown)}")
        self.records.append(row)

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> list[Any]:
        return [r.get(name) for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.records:
            w.writerow([_fmt(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())
