"""Independent oracles shared by the test modules."""

from __future__ import annotations

import math

from scipy import stats

MN = 1e6


def analytic_partial_expectation(mu: float, sigma: float, upper: float) -> float:
    """E[X; X <= upper] for a log-normal, closed form."""
    return math.exp(mu + sigma**2 / 2) * stats.norm.cdf((math.log(upper) - mu - sigma**2) / sigma)
