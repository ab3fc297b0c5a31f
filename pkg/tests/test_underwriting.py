from __future__ import annotations

import numpy as np
import pytest

from cybersim.stochastic import CashMoments, DomainError, lognormal_mean
from cybersim.underwriting import (
    ContractSpec,
    Holding,
    LossSample,
    Portfolio,
    loading,
    merge_portfolios,
    premium_written,
    reserves,
    simulate_portfolio_losses,
    stress_loss,
    technical_premium,
    technical_rate,
    weighted_average_rate,
)

from helpers import MN


def test_technical_premium(alpha, charlie):
    assert technical_premium(alpha) == pytest.approx(4.0 * MN)
    assert technical_premium(charlie) == pytest.approx(7.1 * MN)


def test_empty_portfolio():
    assert technical_premium(Portfolio("empty", ())) == 0.0


@pytest.mark.parametrize("tp,want", [(4.0 * MN, 0.04), (12.0 * MN, 0.12)])
def test_loading(tp, want):
    assert loading(tp, 0.5, 100 * MN) == pytest.approx(want)


def test_loading_at_full_loss_ratio():
    assert loading(4 * MN, 1.0, 100 * MN) == 0.0


@pytest.mark.parametrize("lr", [0.0, 1.2])
def test_loading_domain(lr):
    with pytest.raises(DomainError):
        loading(1.0, lr, 1.0)


def test_charged_rates(alpha, echo):
    assert weighted_average_rate(alpha, loading(technical_premium(alpha), 0.5, alpha.exposure)) == pytest.approx(0.08)
    assert weighted_average_rate(echo, loading(technical_premium(echo), 0.5, echo.exposure)) == pytest.approx(0.24)
    assert weighted_average_rate(alpha, 0.0) == technical_rate(alpha)
    assert premium_written(echo) == pytest.approx(24 * MN)


def test_simulated_alpha(alpha):
    s = simulate_portfolio_losses(alpha, 100_000, 11)
    assert s.mean == pytest.approx(3.6 * MN, rel=0.03)
    assert s.sd == pytest.approx(0.85 * MN, rel=0.03)


def test_simulated_echo(echo):
    s = simulate_portfolio_losses(echo, 100_000, 12)
    assert s.mean == pytest.approx(10.8 * MN, rel=0.05)
    assert s.sd == pytest.approx(7.9 * MN, rel=0.05)


def test_zero_probability_portfolio():
    c = ContractSpec(1e6, CashMoments(1e5, 1e4), claim_probability=0.0)
    s = simulate_portfolio_losses(Portfolio("z", (Holding(c, 10),)), 100, 1)
    assert np.all(s.per_run_totals == 0)


def test_mean_converges_to_analytic(charlie):
    s = simulate_portfolio_losses(charlie, 100_000, 13)
    analytic = sum(h.expected_claims * lognormal_mean(h.contract.severity_params()) for h in charlie.holdings)
    assert abs(s.mean - analytic) < 3 * s.standard_error


def test_stress_charlie(charlie):
    sp = stress_loss(charlie, 0.95, 0.95)
    assert sp.total_loss == pytest.approx(28.0 * MN, abs=0.05 * MN)
    assert sp.total_loss == pytest.approx(sum(sp.per_contract_breakdown))
    assert [round(x / MN, 1) for x in sp.per_contract_breakdown] == [2.6, 4.6, 11.1, 9.7, 0.0]


def test_stress_alpha(alpha):
    assert stress_loss(alpha, 0.975, 0.975).total_loss == pytest.approx(9.4 * MN, abs=0.05 * MN)


def test_stress_ten_million_low_risk():
    c = ContractSpec(10e6, CashMoments(2.5e6, 1.25e6), frequency_lambda=0.25)
    assert stress_loss(Portfolio("t", (Holding(c, 4),)), 0.995, 0.5).total_loss == pytest.approx(8.9 * MN, abs=0.05 * MN)


@pytest.mark.parametrize("q", [0.0, 1.0])
def test_stress_domain(alpha, q):
    with pytest.raises(DomainError):
        stress_loss(alpha, q, 0.5)


def test_reserves(alpha):
    assert reserves(alpha.with_capital(3.6 * MN), 8.0 * MN) == pytest.approx(11.6 * MN)
    assert reserves(alpha.with_capital(0.0), 8.0 * MN) == 8.0 * MN
    with pytest.raises(DomainError):
        reserves(alpha, 1.0)


def test_contract_validation():
    with pytest.raises(DomainError):
        ContractSpec(1e5, CashMoments(2e5, 1e4), claim_probability=0.1)
    with pytest.raises(DomainError):
        ContractSpec(1e6, CashMoments(2e5, 1e4))
    with pytest.raises(DomainError):
        ContractSpec(1e6, CashMoments(2e5, 1e4), claim_probability=0.1, frequency_lambda=0.1)
    with pytest.raises(DomainError):
        Holding(ContractSpec(1e6, CashMoments(2e5, 1e4), claim_probability=0.1), -1)


def test_loss_sample_stats():
    s = LossSample(np.array([1.0, 2.0, 3.0]))
    assert s.mean == 2.0 and s.sd == 1.0 and s.runs == 3
    with pytest.raises(DomainError):
        LossSample(np.array([]))


def test_merged_portfolio_adds_moments(alpha, echo):
    merged = merge_portfolios("AE", [alpha, echo])
    a = simulate_portfolio_losses(alpha, 100_000, 21)
    e = simulate_portfolio_losses(echo, 100_000, 22)
    m = simulate_portfolio_losses(merged, 100_000, 23)
    se = np.sqrt(a.standard_error**2 + e.standard_error**2 + m.standard_error**2)
    assert abs(m.mean - (a.mean + e.mean)) < 4 * se
    assert m.sd**2 == pytest.approx(a.sd**2 + e.sd**2, rel=0.05)


def test_capped_severity(echo):
    capped = simulate_portfolio_losses(echo, 20_000, 5, cap_severity=True)
    raw = simulate_portfolio_losses(echo, 20_000, 5)
    assert np.all(capped.per_run_totals <= raw.per_run_totals + 1e-6)


def test_per_policy_frequency(alpha):
    s = simulate_portfolio_losses(alpha, 50_000, 6, per_policy=True)
    assert s.mean == pytest.approx(3.6 * MN, rel=0.03)
