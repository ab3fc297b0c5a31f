"""Single-contract benchmark market: 100 identical policies, two claim frequencies,
buyer demand, and an excess-of-loss grid priced on a fitted total-loss curve."""

from __future__ import annotations

import numpy as np

from ..buyer import BuyerProfile, coverage_grid, expected_utility, optimal_coverage
from ..reinsurance import capped_loss_sample, xl_indemnity, xl_premium, xl_rate_by_exceedance
from ..stochastic import PoissonParams, fit_lognormal, lognormal_pdf, make_rng, poisson_pmf
from ..underwriting import (
    ContractSpec,
    Holding,
    LossSample,
    Portfolio,
    simulate_portfolio_losses,
    technical_premium,
    technical_rate,
)
from ..units import money_label
from .common import campaign_seed, histogram_series, new_report
from .config import BenchmarkConfig
from .report import FRACTION, LABEL, NUMBER, USD, Report


def frequency_label(p: float) -> str:
    return f"{p:.0%}"


def layer_label(attachment: float, layer: float) -> str:
    return f"{money_label(layer)} xs {money_label(attachment)}"


def benchmark_portfolio(cfg: BenchmarkConfig, claim_probability: float) -> Portfolio:
    contract = ContractSpec(cfg.limit, cfg.severity, claim_probability=claim_probability)
    return Portfolio(frequency_label(claim_probability), (Holding(contract, cfg.policies),))


def run_benchmark(cfg: BenchmarkConfig) -> Report:
    s = cfg.settings
    report = new_report(cfg.scenario, s)

    losses = report.table(
        "benchmark_losses",
        "Expected versus simulated losses",
        [
            ("frequency", LABEL),
            ("claim_probability", FRACTION),
            ("exposure", USD),
            ("expected_loss", USD),
            ("technical_rate", FRACTION),
            ("simulated_loss", USD),
            ("simulated_sd", USD),
            ("standard_error", USD),
        ],
    )
    samples: dict[float, LossSample] = {}
    for p in cfg.claim_probabilities:
        port = benchmark_portfolio(cfg, p)
        sample = simulate_portfolio_losses(
            port, s.runs, campaign_seed(s, f"benchmark/{p!r}"), convention=s.convention, threads=s.threads
        )
        samples[p] = sample
        losses.add(
            port.name, p, port.exposure, technical_premium(port), technical_rate(port),
            sample.mean, sample.sd, sample.standard_error,
        )
        histogram_series(report, "loss_histogram", port.name, sample.per_run_totals, cfg.histogram_bin)

    _buyer_tables(cfg, report)
    _xl_tables(cfg, report, samples)
    _distribution_plots(cfg, report)
    return report


def _buyer_tables(cfg: BenchmarkConfig, report: Report) -> None:
    t = report.table(
        "buyer_optimum",
        "Utility-maximising cover at the technical premium rate",
        [
            ("frequency", LABEL),
            ("premium_rate", FRACTION),
            ("optimal_coverage", USD),
            ("utility_at_optimum", NUMBER),
            ("utility_no_cover", NUMBER),
            ("utility_full_cover", NUMBER),
        ],
    )
    grid = coverage_grid(cfg.limit, cfg.grid_step)
    for p in cfg.claim_probabilities:
        profile = BuyerProfile(cfg.wealth, cfg.risk_aversion, p, cfg.loss_size, cfg.limit, cfg.deductible)
        rate = p * cfg.severity.mean / cfg.limit
        best = optimal_coverage(profile, rate, cfg.grid_step)
        t.add(
            frequency_label(p), rate, best,
            expected_utility(profile, rate, best),
            expected_utility(profile, rate, 0.0),
            expected_utility(profile, rate, cfg.limit),
        )
        report.add_series("buyer_utility", frequency_label(p), grid, expected_utility(profile, rate, grid))
        # demand curve: optimal cover across premium rates
        rates = np.linspace(0.0, 2 * rate, 41)
        report.add_series(
            "buyer_demand", frequency_label(p), rates, [optimal_coverage(profile, r, cfg.grid_step) for r in rates]
        )


def _xl_tables(cfg: BenchmarkConfig, report: Report, samples: dict[float, LossSample]) -> None:
    s = cfg.settings
    fit_source = samples.get(cfg.fit_probability)
    if fit_source is None:
        port = benchmark_portfolio(cfg, cfg.fit_probability)
        fit_source = simulate_portfolio_losses(
            port, s.runs, campaign_seed(s, f"benchmark/{cfg.fit_probability!r}"), convention=s.convention, threads=s.threads
        )

    fit = report.table(
        "benchmark_fit",
        "Log-normal curves for the pooled benchmark losses",
        [("source", LABEL), ("mu_log", NUMBER), ("sigma_log", NUMBER), ("mean", USD)],
    )
    fit.add("pinned", cfg.fitted.mu_log, cfg.fitted.sigma_log, cfg.fitted.mean)
    positive = fit_source.per_run_totals[fit_source.per_run_totals > 0]
    if positive.size >= 2:
        own = fit_lognormal(positive)
        fit.add("engine_mle", own.mu_log, own.sigma_log, own.mean)
    fit.notes.append("pinned is the curve used to price the layers; engine_mle is fitted to the simulated totals")

    # the capped-loss column is read off draws from the pinned curve
    rng = make_rng(campaign_seed(s, "benchmark/fitted"))
    fitted_sample = LossSample(rng.lognormal(cfg.fitted.mu_log, cfg.fitted.sigma_log, s.runs))

    t = report.table(
        "xl_benchmark",
        "Excess-of-loss layers on the pooled benchmark losses",
        [
            ("layer", LABEL),
            ("attachment", USD),
            ("cover", USD),
            ("rate", FRACTION),
            ("technical_premium", USD),
            ("expected_indemnity", USD),
            ("capped_loss", USD),
            ("loss_reduction", USD),
        ],
    )
    for terms in cfg.layers:
        rate = xl_rate_by_exceedance(cfg.fitted, terms)
        capped = capped_loss_sample(fitted_sample, terms.attachment, cfg.capped_mode, terms.layer)
        t.add(
            layer_label(terms.attachment, terms.layer),
            terms.attachment,
            terms.layer,
            rate,
            xl_premium(cfg.fitted, terms),
            float(np.mean(xl_indemnity(fitted_sample.per_run_totals, terms))),
            capped.mean,
            fitted_sample.mean - capped.mean,
        )
    t.notes.append(f"capped losses use mode '{cfg.capped_mode}' on {s.runs} draws from the pinned curve")


def _distribution_plots(cfg: BenchmarkConfig, report: Report) -> None:
    sev = ContractSpec(cfg.limit, cfg.severity, claim_probability=0.0).severity_params(cfg.settings.convention)
    xs = np.linspace(cfg.severity.mean / 100, 3 * cfg.severity.mean, 200)
    report.add_series("severity_pdf", "severity", xs, lognormal_pdf(sev, xs))
    for p in cfg.claim_probabilities:
        lam = p * cfg.policies
        ks = np.arange(0, int(lam + 6 * np.sqrt(max(lam, 1.0))) + 1)
        report.add_series(
            "frequency_pmf", frequency_label(p), ks, [poisson_pmf(PoissonParams(lam), int(k)) for k in ks]
        )
