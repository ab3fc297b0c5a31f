from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from cybersim.stochastic import (
    PAPER,
    TEXTBOOK,
    CashMoments,
    CompoundComponent,
    DomainError,
    LogNormalParams,
    NumericError,
    PoissonParams,
    derive_seed,
    fit_lognormal,
    lognormal_cdf,
    lognormal_from_moments,
    lognormal_mean,
    lognormal_pdf,
    lognormal_quantile,
    lognormal_sd,
    lognormal_sf,
    make_rng,
    poisson_cdf,
    poisson_pmf,
    poisson_quantile,
    sample_frequency,
    sample_severity,
    simulate_compound,
    truncated_expectation,
)

from helpers import MN, analytic_partial_expectation


class TestMoments:
    def test_benchmark_severity(self):
        p = lognormal_from_moments(CashMoments(500_000, 250_000))
        assert round(p.mu_log, 1) == 13.0
        assert round(p.sigma_log, 2) == 0.22

    def test_tier_severity(self):
        p = lognormal_from_moments(CashMoments(125_000, 62_500))
        assert (round(p.mu_log, 1), round(p.sigma_log, 2)) == (11.6, 0.22)

    def test_degenerate(self):
        p = lognormal_from_moments(CashMoments(7.0, 0.0))
        assert p.mu_log == pytest.approx(math.log(7.0))
        assert p.sigma_log == 0

    def test_sigma_is_log_variance_under_default(self):
        cv = 0.5
        assert lognormal_from_moments(CashMoments(1.0, cv)).sigma_log == pytest.approx(math.log(1 + cv**2))

    def test_textbook_matches_moments(self):
        m = CashMoments(400_000, 350_000)
        p = lognormal_from_moments(m, TEXTBOOK)
        assert lognormal_mean(p) == pytest.approx(m.mean, rel=1e-12)
        assert lognormal_sd(p) == pytest.approx(m.sd, rel=1e-12)

    def test_paper_convention_understates_mean(self):
        m = CashMoments(500_000, 250_000)
        assert lognormal_mean(lognormal_from_moments(m, PAPER)) < m.mean

    @pytest.mark.parametrize("mean", [0.0, -1.0])
    def test_bad_mean(self, mean):
        with pytest.raises(DomainError):
            CashMoments(mean, 1.0)

    def test_unknown_convention(self):
        with pytest.raises(DomainError):
            lognormal_from_moments(CashMoments(1.0, 1.0), "other")


class TestLogNormalFunctions:
    def test_distribution_a_quantile(self):
        p = lognormal_from_moments(CashMoments(10 * MN, 10 * MN))
        assert lognormal_quantile(p, 0.995) == pytest.approx(42 * MN, abs=0.5 * MN)

    def test_printed_params_quantile(self):
        assert lognormal_quantile(LogNormalParams(15.8, 0.69), 0.995) == pytest.approx(42 * MN, rel=0.03)

    def test_median(self):
        p = LogNormalParams(13.0, 0.22)
        assert lognormal_quantile(p, 0.5) == pytest.approx(math.exp(13.0))

    def test_cdf_near_zero(self):
        assert lognormal_cdf(LogNormalParams(13.0, 0.22), 1e-300) == pytest.approx(0.0, abs=1e-300)

    def test_exceedance_oracle(self):
        # error-function evaluation of Phi
        z = (math.log(30 * MN) - 16.9) / 0.27
        oracle = 0.5 * math.erfc(z / math.sqrt(2))
        assert lognormal_sf(LogNormalParams(16.9, 0.27), 30 * MN) == pytest.approx(oracle, rel=1e-12)
        assert oracle == pytest.approx(0.125, abs=0.006)

    def test_matches_scipy(self):
        p = LogNormalParams(12.0, 0.7)
        ref = stats.lognorm(s=0.7, scale=math.exp(12.0))
        xs = np.array([1e4, 1e5, 3e5, 1e6])
        assert np.allclose(lognormal_pdf(p, xs), ref.pdf(xs), rtol=1e-12)
        assert np.allclose(lognormal_cdf(p, xs), ref.cdf(xs), rtol=1e-12)

    def test_vector_and_scalar(self):
        p = LogNormalParams(0.0, 1.0)
        assert isinstance(lognormal_cdf(p, 1.0), float)
        assert lognormal_cdf(p, [1.0, 2.0]).shape == (2,)

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_pdf_domain(self, x):
        with pytest.raises(DomainError):
            lognormal_pdf(LogNormalParams(0, 1), x)

    @pytest.mark.parametrize("q", [0.0, 1.0, 1.5])
    def test_quantile_domain(self, q):
        with pytest.raises(DomainError):
            lognormal_quantile(LogNormalParams(0, 1), q)

    def test_negative_sigma(self):
        with pytest.raises(DomainError):
            LogNormalParams(0.0, -0.1)


class TestPoisson:
    def test_pmf_zero(self):
        assert poisson_pmf(PoissonParams(3.2), 0) == pytest.approx(math.exp(-3.2))

    def test_pmf_matches_formula(self):
        lam, k = 7.5, 4
        assert poisson_pmf(PoissonParams(lam), k) == pytest.approx(lam**k * math.exp(-lam) / math.factorial(k))

    def test_alpha_stress_count(self):
        # exact pmf summation oracle
        lam, total, k = 20.0, 0.0, 0
        while True:
            total += lam**k * math.exp(-lam) / math.factorial(k)
            if total >= 0.95:
                break
            k += 1
        assert poisson_quantile(PoissonParams(20), 0.95) == k == 28

    def test_low_risk_ten_million(self):
        assert poisson_quantile(PoissonParams(1.0), 0.995) == 4
        sev = lognormal_from_moments(CashMoments(2.5 * MN, 1.25 * MN))
        assert 4 * math.exp(sev.mu_log) == pytest.approx(8.9 * MN, abs=0.05 * MN)

    def test_zero_rate(self):
        assert poisson_quantile(PoissonParams(0.0), 0.99) == 0
        assert poisson_cdf(PoissonParams(0.0), 0) == 1.0

    def test_negative_k(self):
        with pytest.raises(DomainError):
            poisson_pmf(PoissonParams(1.0), -1)

    def test_negative_lambda(self):
        with pytest.raises(DomainError):
            PoissonParams(-1.0)


class TestTruncatedExpectation:
    def test_infinite_upper_is_mean(self):
        p = LogNormalParams(13.0, 0.22)
        assert truncated_expectation(p, math.inf) == pytest.approx(lognormal_mean(p), rel=1e-12)

    @pytest.mark.parametrize("mu,sigma,upper", [(15.8, 0.69, 500e6), (16.9, 0.69, 500e6), (13.0, 0.22, 4e5), (17.6, 0.69, 1e7)])
    def test_against_closed_form(self, mu, sigma, upper):
        got = truncated_expectation(LogNormalParams(mu, sigma), upper)
        assert got == pytest.approx(analytic_partial_expectation(mu, sigma, upper), rel=1e-6)

    def test_distribution_a(self):
        p = LogNormalParams(15.8, 0.69)
        assert truncated_expectation(p, 500e6) == pytest.approx(9.2 * MN, rel=0.03)
        assert truncated_expectation(p, 500e6) / (0.1 * 500e6) == pytest.approx(0.18, abs=0.01)

    def test_distribution_c_rate(self):
        assert truncated_expectation(LogNormalParams(16.9, 0.69), 500e6) / (0.5 * 500e6) == pytest.approx(0.11, abs=0.01)

    def test_point_mass(self):
        p = LogNormalParams(math.log(10.0), 0.0)
        assert truncated_expectation(p, 20.0) == pytest.approx(10.0)
        assert truncated_expectation(p, 5.0) == 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            truncated_expectation(LogNormalParams(0, 1), 0.0)

    def test_tolerance_below_machine_precision(self):
        with pytest.raises(DomainError):
            truncated_expectation(LogNormalParams(0, 1), 2.0, rtol=1e-300)

    def test_non_convergence_reports_diagnostics(self, monkeypatch):
        from scipy import integrate

        real_quad = integrate.quad

        def starved(*args, **kwargs):
            kwargs["limit"] = 1
            return real_quad(*args, **kwargs)

        monkeypatch.setattr("cybersim.stochastic.integrate.quad", starved)
        with pytest.raises(NumericError) as info:
            truncated_expectation(LogNormalParams(16.9, 0.69), 500e6, rtol=1e-13)
        assert info.value.diagnostics["message"]
        assert info.value.diagnostics["abserr"] > 0


class TestFit:
    def test_constant(self):
        p = fit_lognormal([5.0] * 10)
        assert p.mu_log == pytest.approx(math.log(5.0))
        assert p.sigma_log == 0

    def test_recovers_parameters(self, rng):
        draws = rng.lognormal(13.0, 0.22, 100_000)
        p = fit_lognormal(draws)
        assert p.mu_log == pytest.approx(13.0, rel=0.01)
        assert p.sigma_log == pytest.approx(0.22, rel=0.01)

    def test_compound_fit_is_narrower_than_pinned(self):
        sev = lognormal_from_moments(CashMoments(500_000, 250_000))
        totals = simulate_compound([CompoundComponent(50, sev)], 100_000, 1)
        p = fit_lognormal(totals)
        assert p.mu_log == pytest.approx(16.9, abs=0.05)
        assert p.sigma_log < 0.2  # a pinned 0.27 does not come out of an MLE fit

    @pytest.mark.parametrize("bad", [[1.0, 0.0], [1.0, -2.0], [3.0]])
    def test_bad_samples(self, bad):
        with pytest.raises(DomainError):
            fit_lognormal(bad)


class TestSampling:
    def test_zero_rate_never_claims(self, rng):
        assert all(sample_frequency(PoissonParams(0.0), rng) == 0 for _ in range(100))

    def test_severity_mean(self):
        p = LogNormalParams(13.0, 0.22)
        draws = make_rng(7).lognormal(p.mu_log, p.sigma_log, 100_000)
        se = draws.std() / math.sqrt(draws.size)
        assert abs(draws.mean() - lognormal_mean(p)) < 3 * se
        assert lognormal_mean(p) == pytest.approx(453_500, rel=1e-3)

    def test_single_draw_reproducible(self):
        p = LogNormalParams(13.0, 0.22)
        assert sample_severity(p, make_rng(3)) == sample_severity(p, make_rng(3))

    def test_benchmark_compound_mean(self):
        sev = lognormal_from_moments(CashMoments(500_000, 250_000))
        totals = simulate_compound([CompoundComponent(50, sev)], 100_000, 2023)
        assert totals.mean() == pytest.approx(22.9 * MN, rel=0.02)

    def test_seed_streams_differ(self):
        sev = LogNormalParams(13.0, 0.22)
        a = simulate_compound([CompoundComponent(5, sev)], 1000, 1)
        b = simulate_compound([CompoundComponent(5, sev)], 1000, 2)
        assert not np.array_equal(a, b)

    def test_derived_seeds(self):
        assert derive_seed(1, "a") == derive_seed(1, "a")
        assert derive_seed(1, "a") != derive_seed(1, "b")
        assert derive_seed(1, "a") != derive_seed(2, "a")

    def test_cap(self):
        sev = LogNormalParams(13.0, 1.0)
        totals = simulate_compound([CompoundComponent(1.0, sev, cap=1.0, trials=1)], 5000, 4)
        assert set(np.unique(totals)) <= {0.0, 1.0}

    def test_per_policy_trials(self):
        sev = LogNormalParams(0.0, 0.0)
        totals = simulate_compound([CompoundComponent(3.0, sev, trials=3)], 100, 5)
        assert np.all(totals == 3.0)

    @pytest.mark.parametrize("seed", [-1, 2**64, 1.5])
    def test_bad_seed(self, seed):
        with pytest.raises(DomainError):
            make_rng(seed)

    def test_bad_runs(self):
        with pytest.raises(DomainError):
            simulate_compound([], 0, 1)
