"""Insurer side: portfolios, technical premium, loading, loss simulation, stress tests."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .stochastic import (
    DEFAULT_BLOCK_SIZE,
    PAPER,
    CashMoments,
    CompoundComponent,
    DomainError,
    LogNormalParams,
    PoissonParams,
    lognormal_from_moments,
    lognormal_quantile,
    poisson_quantile,
    simulate_compound,
)


@dataclass(frozen=True)
class ContractSpec:
    """An insurance contract template.

    Claim frequency per policy is given either as ``claim_probability`` or as
    ``frequency_lambda`` (expected claims per policy per period, may exceed 1).
    """

    limit: float
    severity: CashMoments
    claim_probability: float | None = None
    frequency_lambda: float | None = None
    premium_rate: float | None = None
    name: str = ""

    def __post_init__(self):
        if (self.claim_probability is None) == (self.frequency_lambda is None):
            raise DomainError("give exactly one of claim_probability or frequency_lambda")
        if self.claim_probability is not None and not 0 <= self.claim_probability <= 1:
            raise DomainError("claim probability must lie in [0, 1]")
        if self.frequency_lambda is not None and not self.frequency_lambda >= 0:
            raise DomainError("claim frequency must be >= 0")
        if not self.limit > 0:
            raise DomainError("limit must be > 0")
        if self.severity.mean > self.limit:
            raise DomainError("mean severity may not exceed the contract limit")

    @property
    def claim_rate(self) -> float:
        """Expected claims per policy per period."""
        return self.claim_probability if self.claim_probability is not None else self.frequency_lambda

    @property
    def expected_loss(self) -> float:
        return self.claim_rate * self.severity.mean

    def severity_params(self, convention: str = PAPER) -> LogNormalParams:
        return lognormal_from_moments(self.severity, convention)


@dataclass(frozen=True)
class Holding:
    contract: ContractSpec
    count: int

    def __post_init__(self):
        if self.count < 0 or int(self.count) != self.count:
            raise DomainError(f"policy count must be a non-negative integer, got {self.count}")

    @property
    def expected_claims(self) -> float:
        return self.count * self.contract.claim_rate


@dataclass(frozen=True)
class Portfolio:
    name: str
    holdings: tuple[Holding, ...]
    target_loss_ratio: float = 0.5
    capital: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "holdings", tuple(self.holdings))
        if not 0 < self.target_loss_ratio <= 1:
            raise DomainError("target loss ratio must lie in (0, 1]")

    @property
    def exposure(self) -> float:
        return float(sum(h.count * h.contract.limit for h in self.holdings))

    def with_capital(self, capital: float) -> Portfolio:
        return replace(self, capital=float(capital))


@dataclass(frozen=True)
class LossSample:
    """Per-run total losses of one Monte Carlo campaign."""

    per_run_totals: np.ndarray
    seed: int | None = None
    mean: float = field(init=False)
    sd: float = field(init=False)

    def __post_init__(self):
        totals = np.asarray(self.per_run_totals, dtype=float)
        if totals.ndim != 1 or totals.size == 0:
            raise DomainError("a loss sample needs at least one run")
        object.__setattr__(self, "per_run_totals", totals)
        object.__setattr__(self, "mean", float(totals.mean()))
        object.__setattr__(self, "sd", float(totals.std(ddof=1)) if totals.size > 1 else 0.0)

    @property
    def runs(self) -> int:
        return int(self.per_run_totals.size)

    @property
    def standard_error(self) -> float:
        return self.sd / np.sqrt(self.runs)


@dataclass(frozen=True)
class StressPoint:
    confidence: float
    severity_confidence: float
    total_loss: float
    per_contract_breakdown: tuple[float, ...]


def technical_premium(p: Portfolio) -> float:
    """Break-even premium: expected claims times mean cash severity, summed."""
    return float(sum(h.count * h.contract.expected_loss for h in p.holdings))


def loading(technical_premium: float, target_lr: float, exposure: float) -> float:
    """Surcharge rate (fraction of exposure) that brings the loss ratio to ``target_lr``."""
    if not 0 < target_lr <= 1:
        raise DomainError("target loss ratio must lie in (0, 1]")
    if not exposure > 0:
        raise DomainError("exposure must be > 0")
    return (technical_premium / target_lr - technical_premium) / exposure


def technical_rate(p: Portfolio) -> float:
    if not p.exposure > 0:
        raise DomainError(f"portfolio {p.name!r} has no exposure")
    return technical_premium(p) / p.exposure


def weighted_average_rate(p: Portfolio, loading: float) -> float:
    return technical_rate(p) + loading


def premium_written(p: Portfolio) -> float:
    """Cash premium charged at the portfolio's target loss ratio."""
    if not p.exposure > 0:
        return 0.0
    tp = technical_premium(p)
    return weighted_average_rate(p, loading(tp, p.target_loss_ratio, p.exposure)) * p.exposure


def loss_components(
    p: Portfolio, convention: str = PAPER, *, per_policy: bool = False, cap_severity: bool = False
) -> list[CompoundComponent]:
    comps = []
    for h in p.holdings:
        if h.count == 0:
            continue
        c = h.contract
        comps.append(
            CompoundComponent(
                expected_count=h.expected_claims,
                severity=c.severity_params(convention),
                cap=c.limit if cap_severity else None,
                trials=h.count if per_policy else None,
            )
        )
    return comps


def simulate_portfolio_losses(
    p: Portfolio,
    runs: int,
    seed: int,
    *,
    convention: str = PAPER,
    per_policy: bool = False,
    cap_severity: bool = False,
    threads: int | None = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> LossSample:
    """Simulate aggregate portfolio losses.

    Each run draws one Poisson claim count per contract type, with rate
    ``claim_rate * count``, then that many log-normal severities. Severities
    are uncapped unless ``cap_severity``; ``per_policy`` swaps the Poisson
    count for one Bernoulli trial per policy.
    """
    comps = loss_components(p, convention, per_policy=per_policy, cap_severity=cap_severity)
    if not comps:
        if runs < 1:
            raise DomainError(f"runs must be >= 1, got {runs}")
        return LossSample(np.zeros(runs), seed)
    totals = simulate_compound(comps, runs, seed, threads=threads, block_size=block_size)
    return LossSample(totals, seed)


def stress_loss(p: Portfolio, freq_q: float, sev_q: float, convention: str = PAPER) -> StressPoint:
    """Deterministic stress loss: per contract type, the ``freq_q`` claim-count
    quantile times the ``sev_q`` severity quantile, summed over types."""
    for q in (freq_q, sev_q):
        if not 0 < q < 1:
            raise DomainError("stress quantile levels must lie in (0, 1)")
    parts = []
    for h in p.holdings:
        if h.count == 0:
            parts.append(0.0)
            continue
        k = poisson_quantile(PoissonParams(h.expected_claims), freq_q)
        parts.append(k * float(lognormal_quantile(h.contract.severity_params(convention), sev_q)))
    return StressPoint(freq_q, sev_q, float(sum(parts)), tuple(parts))


def reserves(p: Portfolio, premium_income: float) -> float:
    if p.capital is None:
        raise DomainError(f"portfolio {p.name!r} has no capital set")
    return premium_income + p.capital


def merge_portfolios(name: str, portfolios: Sequence[Portfolio]) -> Portfolio:
    holdings = [h for p in portfolios for h in p.holdings]
    return Portfolio(name, tuple(holdings), portfolios[0].target_loss_ratio if portfolios else 0.5)
