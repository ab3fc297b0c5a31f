"""Expected-utility insurance demand for a CARA buyer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .stochastic import DomainError


@dataclass(frozen=True)
class BuyerProfile:
    """A buyer facing a single loss state.

    ``limit`` is the most cover the insurer will sell; ``deductible`` is borne
    by the buyer in the loss state.
    """

    wealth: float
    risk_aversion: float
    loss_probability: float
    loss_size: float
    limit: float
    deductible: float = 0.0

    def __post_init__(self):
        if not 0 <= self.loss_probability <= 1:
            raise DomainError("loss probability must lie in [0, 1]")
        if not self.risk_aversion > 0:
            raise DomainError("risk aversion must be > 0")
        if not self.deductible >= 0:
            raise DomainError("deductible must be >= 0")
        if not self.limit > 0:
            raise DomainError("limit must be > 0")


@dataclass(frozen=True)
class LossState:
    probability: float
    loss: float
    coverage: float
    deductible: float = 0.0


def cara_utility(w, alpha: float):
    """``(1 - exp(-alpha w)) / alpha``; use :func:`risk_neutral_utility` for alpha = 0."""
    if alpha == 0:
        raise DomainError("CARA utility needs alpha != 0; use risk_neutral_utility")
    w = np.asarray(w, dtype=float)
    u = -np.expm1(-alpha * w) / alpha
    return float(u) if u.ndim == 0 else u


def risk_neutral_utility(w):
    return w


def expected_utility(profile: BuyerProfile, premium_rate: float, coverage):
    """Expected utility of buying ``coverage`` at ``premium_rate`` per unit of cover.

    ``coverage`` may be an array, giving the whole utility curve at once.
    """
    c = np.asarray(coverage, dtype=float)
    if np.any(c < 0) or np.any(c > profile.limit):
        raise DomainError(f"coverage must lie in [0, {profile.limit}]")
    pi = profile.loss_probability
    wealth_after_premium = profile.wealth - premium_rate * c
    wealth_in_loss = wealth_after_premium - profile.loss_size + c - profile.deductible
    alpha = profile.risk_aversion
    eu = (1 - pi) * cara_utility(wealth_after_premium, alpha) + pi * cara_utility(wealth_in_loss, alpha)
    return float(eu) if np.ndim(eu) == 0 else eu


def expected_utility_states(
    wealth: float, risk_aversion: float, premium: float, states: Sequence[LossState]
) -> float:
    """Expected utility over a finite list of loss states plus the no-loss state.

    ``premium`` is the total cash premium paid.
    """
    total_p = sum(s.probability for s in states)
    if any(s.probability < 0 for s in states) or total_p > 1 + 1e-12:
        raise DomainError("state probabilities must be >= 0 and sum to at most 1")
    base = wealth - premium
    eu = (1 - total_p) * cara_utility(base, risk_aversion)
    for s in states:
        eu += s.probability * cara_utility(base - s.loss + s.coverage - s.deductible, risk_aversion)
    return float(eu)


def coverage_grid(limit: float, step: float) -> np.ndarray:
    if not step > 0:
        raise DomainError("grid step must be > 0")
    n = int(np.floor(limit / step + 1e-9))
    grid = np.arange(n + 1) * step
    if grid[-1] < limit:
        grid = np.append(grid, limit)
    return np.minimum(grid, limit)


def optimal_coverage(profile: BuyerProfile, premium_rate: float, grid_step: float) -> float:
    """Grid search for the utility-maximising cover; ties go to the smaller cover."""
    grid = coverage_grid(profile.limit, grid_step)
    expected_utility(profile, premium_rate, grid[-1:])  # validates the profile against the grid
    # CARA expected utility is (1 - exp(-alpha W) E[exp(-alpha dW)]) / alpha, so ranking on
    # E[exp(-alpha dW)] finds the same maximiser without W; at large W the
    # utility itself rounds flat near 1/alpha.
    alpha, pi = profile.risk_aversion, profile.loss_probability
    change_no_loss = -premium_rate * grid
    change_loss = change_no_loss - profile.loss_size + grid - profile.deductible
    disutility = (1 - pi) * np.exp(-alpha * change_no_loss) + pi * np.exp(-alpha * change_loss)
    # argmin returns the first (smallest-coverage) minimiser
    return float(grid[int(np.argmin(disutility))])
