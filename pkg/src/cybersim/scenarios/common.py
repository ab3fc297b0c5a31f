"""Helpers shared by the scenario runners."""

from __future__ import annotations

import numpy as np

from .. import __version__
from ..stochastic import derive_seed
from .config import RunSettings
from .report import Report


def new_report(scenario: str, settings: RunSettings) -> Report:
    return Report(
        scenario,
        meta={
            "version": __version__,
            "runs": settings.runs,
            "seed": settings.seed,
            "sigma_convention": settings.convention,
        },
    )


def campaign_seed(settings: RunSettings, label: str) -> int:
    """Each named campaign gets its own stream so adding one never shifts another."""
    return derive_seed(settings.seed, label)


def histogram_series(report: Report, plot_id: str, series: str, totals: np.ndarray, bin_width: float) -> None:
    """Normalised histogram as (bin left edge, share of runs)."""
    top = max(float(totals.max()), bin_width)
    edges = np.arange(0.0, top + bin_width, bin_width)
    counts, edges = np.histogram(totals, bins=edges)
    report.add_series(plot_id, series, edges[:-1], counts / totals.size)
