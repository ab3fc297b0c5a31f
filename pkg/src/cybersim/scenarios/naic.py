"""Market loss experience: premium-weighted loss ratios and zero-intercept trend
of losses on written premium, per year."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .common import new_report
from .config import ConfigError, NaicConfig
from .report import COUNT, FRACTION, LABEL, USD, Report

NAIC_COLUMNS = ("firm", "year", "dwp_usd_mn", "loss_ratio")


@dataclass(frozen=True)
class NaicRecord:
    firm: str
    year: int
    dwp: float  # USD
    loss_ratio: float

    @property
    def losses(self) -> float:
        return self.dwp * self.loss_ratio


def bundled_naic_path() -> Path:
    return Path(str(resources.files("cybersim") / "data" / "naic_loss_experience.csv"))


def load_naic_records(path: str | Path | None = None) -> list[NaicRecord]:
    """Read ``firm,year,dwp_usd_mn,loss_ratio`` rows; all problems are reported together."""
    path = Path(path) if path is not None else bundled_naic_path()
    errors, records = [], []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"data: cannot read file: {exc}"], str(path)) from None
    with fh:
        reader = csv.DictReader(fh)
        missing = [c for c in NAIC_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ConfigError([f"header: missing column(s) {', '.join(missing)}"], str(path))
        for i, row in enumerate(reader, start=2):
            try:
                firm = (row["firm"] or "").strip()
                if not firm:
                    raise ValueError("firm is empty")
                year = int(row["year"])
                dwp = float(row["dwp_usd_mn"]) * 1e6
                lr = float(row["loss_ratio"])
                if not (math.isfinite(dwp) and dwp >= 0):
                    raise ValueError(f"dwp_usd_mn must be >= 0, got {row['dwp_usd_mn']!r}")
                if not (math.isfinite(lr) and lr >= 0):
                    raise ValueError(f"loss_ratio must be >= 0, got {row['loss_ratio']!r}")
            except (TypeError, ValueError) as exc:
                errors.append(f"line {i}: {exc}")
                continue
            records.append(NaicRecord(firm, year, dwp, lr))
    if errors:
        raise ConfigError(errors, str(path))
    return records


def weighted_loss_ratio(records: list[NaicRecord]) -> float:
    dwp = np.array([r.dwp for r in records])
    lr = np.array([r.loss_ratio for r in records])
    return float(np.sum(dwp * lr) / np.sum(dwp))


def zero_intercept_slope(records: list[NaicRecord]) -> float:
    """Least-squares slope of losses on premium with the line forced through the origin."""
    x = np.array([r.dwp for r in records])
    y = np.array([r.losses for r in records])
    slope, *_ = np.linalg.lstsq(x[:, None], y, rcond=None)
    return float(slope[0])


def run_naic_report(cfg: NaicConfig) -> Report:
    records = load_naic_records(cfg.data_path)
    report = new_report(cfg.scenario, cfg.settings)
    report.meta["headline_year"] = cfg.headline_year

    rt = report.table(
        "naic_records",
        "Direct written premium and loss ratio by firm and year",
        [("record", LABEL), ("firm", LABEL), ("year", COUNT), ("dwp", USD), ("loss_ratio", FRACTION), ("losses", USD)],
    )
    for r in records:
        rt.add(f"{r.firm} {r.year}", r.firm, r.year, r.dwp, r.loss_ratio, r.losses)

    st = report.table(
        "naic_summary",
        "Premium-weighted loss ratio and zero-intercept trend per year",
        [("year", LABEL), ("firms", COUNT), ("total_dwp", USD), ("weighted_loss_ratio", FRACTION), ("trend_slope", FRACTION)],
    )
    for year in sorted({r.year for r in records}):
        rows = [r for r in records if r.year == year]
        slope = zero_intercept_slope(rows)
        st.add(str(year), len(rows), sum(r.dwp for r in rows), weighted_loss_ratio(rows), slope)
        report.add_series("losses_vs_premium", str(year), [r.dwp for r in rows], [r.losses for r in rows])
        top = max(r.dwp for r in rows)
        report.add_series("trend_line", str(year), [0.0, top], [0.0, slope * top])
    if cfg.headline_year not in {r.year for r in records}:
        st.notes.append(f"headline year {cfg.headline_year} has no records")
    return report
