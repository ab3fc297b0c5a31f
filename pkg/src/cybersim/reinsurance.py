"""Reinsurer pricing and the cedent's reinsurance decision."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .stochastic import DomainError, LogNormalParams, lognormal_sf, truncated_expectation
from .underwriting import LossSample

NOT_NEEDED = "not_needed"
OK = "ok"
INSOLVENT = "insolvent"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class ReinsurerView:
    """The reinsurer's belief about pooled losses and its pricing target."""

    loss_distribution: LogNormalParams
    target_loss_ratio: float
    max_cover: float

    def __post_init__(self):
        if not 0 < self.target_loss_ratio <= 1:
            raise DomainError("target loss ratio must lie in (0, 1]")
        if not self.max_cover > 0:
            raise DomainError("maximum cover must be > 0")


@dataclass(frozen=True)
class QuotaShareTerms:
    rho: float
    ceding_commission: float
    reinsurance_rate: float = 0.0

    def __post_init__(self):
        if not 0 <= self.rho <= 1:
            raise DomainError("ceded fraction must lie in [0, 1]")


@dataclass(frozen=True)
class XLTerms:
    """``layer`` xs ``attachment``."""

    attachment: float
    layer: float
    rate: float = 0.0
    technical_premium: float = 0.0

    def __post_init__(self):
        if not self.attachment >= 0:
            raise DomainError("attachment must be >= 0")
        if not self.layer > 0:
            raise DomainError("layer must be > 0")

    @property
    def exhaustion(self) -> float:
        return self.attachment + self.layer


@dataclass(frozen=True)
class XLQuote:
    """Excess-of-loss price read off a simulated loss sample.

    ``premium`` is the layer priced at the probability of a loss landing in
    it; ``expected_indemnity`` is the mean layer payout, kept for comparison.
    """

    probability: float
    premium: float
    expected_indemnity: float


@dataclass(frozen=True)
class RhoSolution:
    rho: float
    unclamped: float
    status: str


def reinsurance_rate(view: ReinsurerView) -> float:
    """Single rate on cover giving the reinsurer its target loss ratio.

    Expected losses are the partial expectation of the loss distribution up to
    the maximum cover.
    """
    if view.loss_distribution.sigma_log == 0:
        raise DomainError("reinsurance rate is undefined for a degenerate loss distribution")
    expected = truncated_expectation(view.loss_distribution, view.max_cover)
    return expected / (view.target_loss_ratio * view.max_cover)


def xl_indemnity(loss, terms: XLTerms):
    """Layer payout ``(L - B)+ - (L - B - A)+``."""
    x = np.asarray(loss, dtype=float)
    if np.any(x < 0):
        raise DomainError("losses must be >= 0")
    paid = np.clip(x - terms.attachment, 0.0, terms.layer)
    return float(paid) if paid.ndim == 0 else paid


def xl_rate_by_exceedance(dist: LogNormalParams, terms: XLTerms) -> float:
    """Rate on line equal to the probability that losses exceed the attachment."""
    if not terms.attachment > 0:
        raise DomainError("attachment must be > 0")
    return float(lognormal_sf(dist, terms.attachment))


def xl_premium(dist: LogNormalParams, terms: XLTerms) -> float:
    return xl_rate_by_exceedance(dist, terms) * terms.layer


def xl_technical_premium_from_sample(sample: LossSample, terms: XLTerms) -> XLQuote:
    totals = sample.per_run_totals
    in_layer = (totals > terms.attachment) & (totals <= terms.exhaustion)
    prob = float(in_layer.mean())
    return XLQuote(prob, prob * terms.layer, float(np.mean(xl_indemnity(totals, terms))))


def retained_loss(loss, rho: float, deductible: float = 0.0):
    """Loss kept by the cedent after a quota share, net of any deductible layer."""
    loss = np.asarray(loss, dtype=float)
    if deductible == 0:
        kept = loss * (1 - rho)
    else:
        kept = np.where(loss <= deductible, loss, deductible + (1 - rho) * (loss - deductible))
    return float(kept) if kept.ndim == 0 else kept


def insurer_profit(
    loss, premium_written: float, exposure: float, qs: QuotaShareTerms, deductible: float = 0.0
):
    """Cedent profit under a quota share: retained premium plus ceding
    commission on ceded exposure, less retained loss."""
    rho = qs.rho
    kept = retained_loss(loss, rho, deductible)
    return premium_written * (1 - rho) + exposure * rho * qs.ceding_commission - kept


def quota_share_cost(
    loss: float, premium_written: float, exposure: float, qs: QuotaShareTerms, deductible: float = 0.0
) -> float:
    """Profit given up by ceding ``qs.rho`` when losses come in at ``loss``."""
    base = replace(qs, rho=0.0)
    return float(
        insurer_profit(loss, premium_written, exposure, base, deductible)
        - insurer_profit(loss, premium_written, exposure, qs, deductible)
    )


def ceding_commission(avg_premium_rate: float, reinsurance_rate: float) -> float:
    return avg_premium_rate - reinsurance_rate


def solve_rho(
    stress_loss: float, premium_written: float, capital: float, exposure: float, cc: float
) -> RhoSolution:
    """Smallest ceded fraction keeping profit at ``stress_loss`` no worse than ``-capital``."""
    if not exposure > 0:
        raise DomainError("exposure must be > 0")
    if premium_written + capital >= stress_loss:
        return RhoSolution(0.0, 0.0, NOT_NEEDED)
    numerator = stress_loss - premium_written - capital
    denominator = stress_loss - premium_written + exposure * cc
    if denominator <= 0:
        return RhoSolution(math.nan, math.nan, INFEASIBLE)
    raw = numerator / denominator
    if raw > 1:
        return RhoSolution(1.0, raw, INSOLVENT)
    return RhoSolution(raw, raw, OK)


def optimal_rho(
    stress_loss: float, premium_written: float, capital: float, exposure: float, cc: float
) -> float:
    return solve_rho(stress_loss, premium_written, capital, exposure, cc).rho


def capped_loss_sample(
    sample: LossSample, attachment: float, mode: str = "zero", layer: float = math.inf
) -> LossSample:
    """Loss sample with the reinsured part of each run removed.

    ``"zero"`` drops any run whose loss exceeds the attachment to nothing,
    i.e. the whole loss is treated as reinsured once cover binds.
    ``"subtract"`` removes only the layer payout ``layer xs attachment``.
    """
    if not attachment > 0:
        raise DomainError("attachment must be > 0")
    totals = sample.per_run_totals
    if mode == "zero":
        capped = np.where(totals > attachment, 0.0, totals)
    elif mode == "subtract":
        capped = totals - np.clip(totals - attachment, 0.0, layer)
    else:
        raise DomainError(f"unknown capping mode {mode!r}")
    return LossSample(capped, sample.seed)
