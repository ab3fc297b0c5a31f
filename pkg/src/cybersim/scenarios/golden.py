"""Reference tables and cell-by-cell comparison of reports against them.

A golden file ``<table id>.csv`` has columns ``row,column,value,tolerance,note``.
Values and tolerances are in the report's own units (dollars, fractions).
A note starting with ``known_issue`` marks a reference cell that is known to
be inconsistent; it is reported as ``flagged`` instead of pass/fail. A note
starting with ``reference_only`` marks a cell that is shown with its delta
but never asserted (status ``info``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

from .report import Report

PASS = "pass"
FAIL = "fail"
MISSING = "missing"
FLAGGED = "flagged"
INFO = "info"

# slack for values that sit exactly on a display-rounding boundary
_EPS = 1e-9


class GoldenError(KeyError):
    pass


@dataclass(frozen=True)
class GoldenCell:
    row: str
    column: str
    value: float
    tolerance: float
    note: str = ""


@dataclass
class GoldenTable:
    id: str
    cells: list[GoldenCell]

    def __post_init__(self):
        for c in self.cells:
            if not c.tolerance > 0:
                raise ValueError(f"golden {self.id} {c.row}/{c.column}: tolerance must be > 0")

    @classmethod
    def read(cls, path: str | Path) -> GoldenTable:
        path = Path(path)
        with open(path, newline="", encoding="utf-8") as fh:
            cells = [
                GoldenCell(r["row"], r["column"], float(r["value"]), float(r["tolerance"]), r.get("note") or "")
                for r in csv.DictReader(fh)
            ]
        return cls(path.stem, cells)

    def write(self, path: str | Path) -> None:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row", "column", "value", "tolerance", "note"])
            for c in self.cells:
                writer.writerow([c.row, c.column, repr(c.value), repr(c.tolerance), c.note])


@dataclass(frozen=True)
class DiffEntry:
    table: str
    row: str
    column: str
    expected: float
    actual: float | None
    delta: float | None
    tolerance: float
    status: str
    note: str = ""


@dataclass
class GoldenDiff:
    entries: list[DiffEntry]

    @property
    def failures(self) -> list[DiffEntry]:
        return [e for e in self.entries if e.status in (FAIL, MISSING)]

    @property
    def flagged(self) -> list[DiffEntry]:
        return [e for e in self.entries if e.status == FLAGGED]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "counts": {s: sum(e.status == s for e in self.entries) for s in (PASS, FAIL, MISSING, FLAGGED, INFO)},
            "entries": [asdict(e) for e in self.entries if e.status != PASS],
        }


def bundled_golden_dir() -> Path:
    return Path(str(resources.files("cybersim") / "data" / "golden"))


def load_goldens(directory: str | Path | None = None, ids: Iterable[str] | None = None) -> list[GoldenTable]:
    directory = Path(directory) if directory is not None else bundled_golden_dir()
    wanted = set(ids) if ids is not None else None
    tables = []
    for path in sorted(directory.glob("*.csv")):
        if wanted is None or path.stem in wanted:
            tables.append(GoldenTable.read(path))
    return tables


def compare_to_golden(report: Report, tables: Iterable[GoldenTable]) -> GoldenDiff:
    entries = []
    for g in tables:
        if g.id not in report.tables:
            raise GoldenError(f"report for scenario {report.scenario!r} has no table {g.id!r}")
        t = report.tables[g.id]
        for c in g.cells:
            try:
                actual = t.cell(c.row, c.column)
            except KeyError:
                actual = None
            if actual is None:
                entries.append(DiffEntry(g.id, c.row, c.column, c.value, None, None, c.tolerance, MISSING, c.note))
                continue
            delta = float(actual) - c.value
            if c.note.startswith("known_issue"):
                status = FLAGGED
            elif c.note.startswith("reference_only"):
                status = INFO
            else:
                status = PASS if abs(delta) <= c.tolerance + _EPS * max(1.0, abs(c.value)) else FAIL
            entries.append(DiffEntry(g.id, c.row, c.column, c.value, float(actual), delta, c.tolerance, status, c.note))
    return GoldenDiff(entries)


def render_diff(diff: GoldenDiff) -> str:
    counts = diff.to_dict()["counts"]
    lines = [
        "golden comparison: " + ("PASS" if diff.passed else "FAIL")
        + " (" + ", ".join(f"{k}={v}" for k, v in counts.items()) + ")"
    ]
    for e in diff.entries:
        if e.status == PASS:
            continue
        actual = "-" if e.actual is None else f"{e.actual:.6g}"
        delta = "-" if e.delta is None or math.isnan(e.delta) else f"{e.delta:+.6g}"
        line = f"  {e.status.upper():8s} {e.table}[{e.row}][{e.column}] expected={e.expected:.6g} actual={actual} delta={delta} tol={e.tolerance:.3g}"
        if e.note:
            line += f"  ({e.note})"
        lines.append(line)
    return "\n".join(lines) + "\n"
