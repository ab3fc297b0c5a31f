"""Scenario reports: tables, plot data, and their file forms."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

USD = "usd"
FRACTION = "fraction"
NUMBER = "number"
COUNT = "count"
LABEL = "label"

_DECIMALS = {USD: 2, FRACTION: 10, NUMBER: 10}


def quantize(value, unit: str):
    """Round a value to the precision it is emitted at.

    Currency is held to the cent so CSV and JSON output never depend on the
    last bits of a double.
    """
    if unit == LABEL:
        return str(value)
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    if unit == COUNT:
        return int(value)
    return round(float(value), _DECIMALS[unit]) + 0.0


def format_value(value, unit: str) -> str:
    if value is None:
        return ""
    if unit in _DECIMALS:
        return f"{value:.{_DECIMALS[unit]}f}"
    return str(value)


@dataclass
class Table:
    id: str
    title: str
    columns: list[tuple[str, str]]
    rows: list[list] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def column_names(self) -> list[str]:
        return [name for name, _ in self.columns]

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"table {self.id}: expected {len(self.columns)} values, got {len(values)}")
        self.rows.append([quantize(v, unit) for v, (_, unit) in zip(values, self.columns)])

    def row_keys(self) -> list[str]:
        return [str(r[0]) for r in self.rows]

    def cell(self, row: str, column: str):
        try:
            j = self.column_names.index(column)
        except ValueError:
            raise KeyError(f"table {self.id} has no column {column!r}") from None
        for r in self.rows:
            if str(r[0]) == row:
                return r[j]
        raise KeyError(f"table {self.id} has no row {row!r}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.column_names)
        for r in self.rows:
            writer.writerow(format_value(v, unit) for v, (_, unit) in zip(r, self.columns))
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "columns": [{"name": n, "unit": u} for n, u in self.columns],
            "rows": self.rows,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, table_id: str, data: dict) -> Table:
        columns = [(c["name"], c["unit"]) for c in data["columns"]]
        return cls(table_id, data["title"], columns, [list(r) for r in data["rows"]], list(data.get("notes", [])))


@dataclass
class Report:
    scenario: str
    tables: dict[str, Table] = field(default_factory=dict)
    plots: dict[str, list[tuple[str, float, float]]] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def table(self, table_id: str, title: str, columns: list[tuple[str, str]]) -> Table:
        t = Table(table_id, title, columns)
        self.tables[table_id] = t
        return t

    def add_series(self, plot_id: str, series: str, xs, ys) -> None:
        points = self.plots.setdefault(plot_id, [])
        points.extend((series, round(float(x), 10) + 0.0, round(float(y), 10) + 0.0) for x, y in zip(xs, ys))

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "meta": self.meta,
            "tables": {k: t.to_dict() for k, t in self.tables.items()},
            "plots": {k: [list(p) for p in v] for k, v in self.plots.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> Report:
        return cls(
            data["scenario"],
            {k: Table.from_dict(k, v) for k, v in data["tables"].items()},
            {k: [tuple(p) for p in v] for k, v in data.get("plots", {}).items()},
            dict(data.get("meta", {})),
        )

    @classmethod
    def load(cls, path: str | Path) -> Report:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def write(self, outdir: str | Path) -> list[Path]:
        """Write ``report.json``, ``table_<id>.csv`` and ``plot_<id>.csv`` files."""
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        written = []

        def emit(name: str, text: str):
            path = out / name
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            written.append(path)

        emit("report.json", self.to_json())
        for table_id, t in self.tables.items():
            emit(f"table_{table_id}.csv", t.to_csv())
        for plot_id, points in self.plots.items():
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["series", "x", "y"])
            for series, x, y in points:
                writer.writerow([series, repr(x), repr(y)])
            emit(f"plot_{plot_id}.csv", buf.getvalue())
        return written


def render_text(report: Report) -> str:
    """Aligned plain-text rendering of every table, values as emitted."""
    lines = [f"scenario: {report.scenario}"]
    for t in report.tables.values():
        lines += ["", f"[{t.id}] {t.title}"]
        cells = [t.column_names] + [
            [format_value(v, unit) for v, (_, unit) in zip(r, t.columns)] for r in t.rows
        ]
        widths = [max(len(row[j]) for row in cells) for j in range(len(t.columns))]
        for row in cells:
            lines.append("  ".join(c.rjust(w) if j else c.ljust(w) for j, (c, w) in enumerate(zip(row, widths))))
        lines += [f"  note: {n}" for n in t.notes]
    return "\n".join(lines) + "\n"
