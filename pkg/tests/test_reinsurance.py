from __future__ import annotations

import math

import numpy as np
import pytest

from cybersim.reinsurance import (
    INFEASIBLE,
    INSOLVENT,
    NOT_NEEDED,
    OK,
    QuotaShareTerms,
    ReinsurerView,
    XLTerms,
    capped_loss_sample,
    ceding_commission,
    insurer_profit,
    optimal_rho,
    quota_share_cost,
    reinsurance_rate,
    retained_loss,
    solve_rho,
    xl_indemnity,
    xl_rate_by_exceedance,
    xl_technical_premium_from_sample,
)
from cybersim.stochastic import CashMoments, DomainError, LogNormalParams, lognormal_from_moments, truncated_expectation
from cybersim.underwriting import LossSample

from helpers import MN

PINNED = LogNormalParams(16.912, 0.2654)
LITERAL = LogNormalParams(16.9, 0.27)


def view(mean_mn, lr):
    return ReinsurerView(lognormal_from_moments(CashMoments(mean_mn * MN, mean_mn * MN)), lr, 500 * MN)


def test_rate_distribution_a():
    assert reinsurance_rate(view(10, 0.1)) == pytest.approx(0.18, abs=0.01)


def test_rate_distribution_f():
    assert reinsurance_rate(view(60, 0.9)) == pytest.approx(0.12, abs=0.01)


def test_rate_one_when_losses_match_target():
    p = LogNormalParams(15.0, 0.5)
    cover = 500 * MN
    lr = truncated_expectation(p, cover) / cover
    assert reinsurance_rate(ReinsurerView(p, lr, cover)) == pytest.approx(1.0)


def test_rate_degenerate():
    with pytest.raises(DomainError):
        reinsurance_rate(ReinsurerView(LogNormalParams(15, 0.0), 0.5, 1e8))


@pytest.mark.parametrize("loss,paid", [(20, 0), (30, 5), (60, 25)])
def test_xl_indemnity(loss, paid):
    assert xl_indemnity(loss * MN, XLTerms(25 * MN, 25 * MN)) == paid * MN


def test_xl_indemnity_negative_loss():
    with pytest.raises(DomainError):
        xl_indemnity(-1.0, XLTerms(1, 1))


@pytest.mark.parametrize("attachment,rate", [(25, 0.322), (30, 0.125), (35, 0.042), (40, 0.013)])
def test_exceedance_rates_pinned(attachment, rate):
    assert xl_rate_by_exceedance(PINNED, XLTerms(attachment * MN, 10 * MN)) == pytest.approx(rate, abs=0.003)


def test_literal_pair_misses_top_layer():
    # the rounded pair lands 1.3pp below the 32.2% rate
    assert xl_rate_by_exceedance(LITERAL, XLTerms(25 * MN, 25 * MN)) == pytest.approx(0.309, abs=0.001)


def test_exceedance_near_zero_attachment():
    assert xl_rate_by_exceedance(PINNED, XLTerms(1.0, 1.0)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        xl_rate_by_exceedance(PINNED, XLTerms(0.0, 1.0))


def test_sample_quote():
    s = LossSample(np.array([0.0, 5.0, 12.0, 30.0]))
    q = xl_technical_premium_from_sample(s, XLTerms(10.0, 10.0))
    assert q.probability == 0.25
    assert q.premium == 2.5
    assert q.expected_indemnity == pytest.approx((2.0 + 10.0) / 4)


def test_sample_quote_above_max():
    s = LossSample(np.array([1.0, 2.0]))
    q = xl_technical_premium_from_sample(s, XLTerms(10.0, 5.0))
    assert (q.probability, q.premium, q.expected_indemnity) == (0.0, 0.0, 0.0)


def test_profit_without_cession():
    qs = QuotaShareTerms(0.0, 0.1)
    assert insurer_profit(10.8 * MN, 24 * MN, 100 * MN, qs) == pytest.approx(13.2 * MN)


def test_profit_echo():
    assert insurer_profit(10.8 * MN, 24 * MN, 100 * MN, QuotaShareTerms(0.47, 0.10)) == pytest.approx(11.7 * MN, abs=0.1 * MN)


def test_profit_beta():
    assert insurer_profit(4.4 * MN, 10 * MN, 100 * MN, QuotaShareTerms(0.87, -0.04)) == pytest.approx(-2.7 * MN, abs=0.1 * MN)


def test_retained_loss_branches():
    assert retained_loss(100.0, 0.4) == pytest.approx(60.0)
    assert retained_loss(10.0, 0.4, deductible=20.0) == 10.0
    assert retained_loss(100.0, 0.4, deductible=20.0) == pytest.approx(20 + 0.6 * 80)


def test_ceding_commission():
    assert ceding_commission(0.142, 0.14) == pytest.approx(0.002)
    assert ceding_commission(0.08, 0.14) == pytest.approx(-0.06)
    assert ceding_commission(0.1, 0.1) == 0.0


def test_rho_not_needed():
    s = solve_rho(9.4 * MN, 8 * MN, 3.6 * MN, 100 * MN, -0.06)
    assert (s.rho, s.status) == (0.0, NOT_NEEDED)


def test_rho_echo():
    assert optimal_rho(53.1 * MN, 24 * MN, 10.8 * MN, 100 * MN, 0.10) == pytest.approx(0.47, abs=0.005)


def test_rho_beta_rounded_inputs():
    # rounded inputs give 18/20.4; the full-precision scenario gives 0.87
    assert optimal_rho(17.4 * MN, 10 * MN, 4.4 * MN, 100 * MN, -0.04) == pytest.approx(3.0 / 3.4)


def test_rho_insolvent():
    s = solve_rho(100.0, 10.0, 0.0, 10.0, -0.5)
    assert s.status == INSOLVENT and s.rho == 1.0 and s.unclamped > 1


def test_rho_infeasible():
    s = solve_rho(20.0, 10.0, 0.0, 10.0, -2.0)
    assert s.status == INFEASIBLE and math.isnan(s.rho)


def test_rho_root_property():
    stress, prem, cap, exp, cc = 53.1 * MN, 24 * MN, 10.8 * MN, 100 * MN, 0.1
    s = solve_rho(stress, prem, cap, exp, cc)
    assert s.status == OK
    assert insurer_profit(stress, prem, exp, QuotaShareTerms(s.rho, cc)) == pytest.approx(-cap, rel=1e-9)


def test_quota_share_cost():
    qs = QuotaShareTerms(0.87, -0.04)
    assert quota_share_cost(4.4 * MN, 10 * MN, 100 * MN, qs) == pytest.approx(8.3 * MN, abs=0.1 * MN)


def test_capped_zero_mode():
    s = LossSample(np.array([10.0, 20.0, 30.0, 40.0]))
    assert list(capped_loss_sample(s, 25.0).per_run_totals) == [10.0, 20.0, 0.0, 0.0]


def test_capped_subtract_mode():
    s = LossSample(np.array([10.0, 30.0, 60.0]))
    capped = capped_loss_sample(s, 25.0, "subtract", 25.0)
    assert list(capped.per_run_totals) == [10.0, 25.0, 35.0]


def test_capped_above_max_unchanged():
    s = LossSample(np.array([1.0, 2.0]))
    assert np.array_equal(capped_loss_sample(s, 5.0).per_run_totals, s.per_run_totals)


@pytest.mark.parametrize("attachment,mean", [(30, 18.7), (40, 22.4)])
def test_capped_means_on_pinned_curve(attachment, mean):
    draws = np.random.default_rng(99).lognormal(PINNED.mu_log, PINNED.sigma_log, 100_000)
    assert capped_loss_sample(LossSample(draws), attachment * MN).mean == pytest.approx(mean * MN, rel=0.03)


def test_capped_bad_mode():
    with pytest.raises(DomainError):
        capped_loss_sample(LossSample(np.array([1.0])), 1.0, "other")


def test_view_validation():
    with pytest.raises(DomainError):
        ReinsurerView(PINNED, 0.0, 1.0)
    with pytest.raises(DomainError):
        ReinsurerView(PINNED, 0.5, 0.0)
    with pytest.raises(DomainError):
        QuotaShareTerms(1.5, 0.0)
    with pytest.raises(DomainError):
        XLTerms(-1.0, 1.0)
