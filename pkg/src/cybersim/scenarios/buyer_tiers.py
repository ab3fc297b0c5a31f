"""Buyers in low/medium/high risk tiers: expected and stress losses per contract,
technical premium against what each tier will pay, and the ceded fraction that
keeps a single contract solvent at its stress loss."""

from __future__ import annotations

from ..reinsurance import ReinsurerView, reinsurance_rate, solve_rho
from ..stochastic import PoissonParams, lognormal_from_moments, lognormal_mean, lognormal_quantile, poisson_quantile
from ..underwriting import ContractSpec, Holding, Portfolio, simulate_portfolio_losses
from ..units import money_label
from .common import campaign_seed, new_report
from .config import BuyerTiersConfig, TierContract
from .report import COUNT, FRACTION, LABEL, NUMBER, USD, Report

ABOVE_CEILING = "above_ceiling"
WITHIN_CEILING = "ok"


def tier_reinsurance_rates(cfg: BuyerTiersConfig) -> dict[str, tuple[float, float]]:
    """Per tier: (exact rate, rate rounded to the quoting step)."""
    out = {}
    for tier, spec in cfg.tier_reinsurance.items():
        view = ReinsurerView(lognormal_from_moments(spec.loss_distribution, cfg.settings.convention), spec.loss_ratio, cfg.max_cover)
        exact = reinsurance_rate(view)
        rounded = round(exact / cfg.quote_rounding) * cfg.quote_rounding if cfg.quote_rounding > 0 else exact
        out[tier] = (exact, rounded)
    return out


def tier_portfolio(c: TierContract, tier: str) -> Portfolio:
    """All of one tier's customers for one contract, as a single pooled frequency."""
    n = c.max_customers[tier]
    spec = ContractSpec(c.limit, c.severity, frequency_lambda=c.lambdas[tier] / n)
    return Portfolio(f"{tier}/{money_label(c.limit)}", (Holding(spec, n),))


def run_buyer_tiers(cfg: BuyerTiersConfig) -> Report:
    s = cfg.settings
    report = new_report(cfg.scenario, s)
    tiers = cfg.tiers
    label = lambda c: money_label(c.limit)  # noqa: E731

    ceilings = report.table(
        "buyer_ceilings",
        "Highest rate each tier pays for full cover, and customer counts",
        [("limit", LABEL)] + [(f"ceiling_{t}", FRACTION) for t in tiers] + [(f"max_customers_{t}", COUNT) for t in tiers],
    )
    specs = report.table(
        "buyer_contracts",
        "Severity and frequency per contract and tier",
        [("limit", LABEL), ("severity_mean", USD), ("severity_sd", USD), ("mu_log", NUMBER), ("sigma_log", NUMBER)]
        + [(f"lambda_{t}", NUMBER) for t in tiers],
    )
    expected = report.table(
        "buyer_expected_losses",
        "Simulated expected losses, all customers and per contract",
        [("limit", LABEL)]
        + [(f"total_{t}", USD) for t in tiers]
        + [(f"per_contract_{t}", USD) for t in tiers]
        + [(f"analytic_total_{t}", USD) for t in tiers],
    )
    premium = report.table(
        "buyer_technical_premium",
        "Technical premium rate per contract against the tier ceiling",
        [("limit", LABEL)] + [(f"rate_{t}", FRACTION) for t in tiers] + [(f"flag_{t}", LABEL) for t in tiers],
    )
    stress = report.table(
        "buyer_stress",
        f"Stress losses, frequency quantile {cfg.stress_frequency:g}, severity quantile {cfg.stress_severity:g}",
        [("limit", LABEL)] + [(f"total_{t}", USD) for t in tiers] + [(f"per_contract_{t}", USD) for t in tiers],
    )
    rho = report.table(
        "buyer_optimal_rho",
        "Ceded fraction keeping one contract solvent at its stress loss",
        [("limit", LABEL)] + [(f"rho_{t}", FRACTION) for t in tiers] + [(f"status_{t}", LABEL) for t in tiers],
    )
    has_reference = any(c.reference_rho for c in cfg.contracts)
    reference = None
    if has_reference:
        reference = report.table(
            "buyer_optimal_rho_reference",
            "Computed ceded fraction next to the reference values",
            [("limit", LABEL)]
            + [col for t in tiers for col in ((f"computed_{t}", FRACTION), (f"reference_{t}", FRACTION), (f"delta_{t}", FRACTION))],
        )

    rates = tier_reinsurance_rates(cfg)
    rt = report.table(
        "tier_reinsurance",
        "Reinsurance rate charged per tier",
        [("tier", LABEL), ("distribution", LABEL), ("loss_ratio", FRACTION), ("rate", FRACTION), ("quoted_rate", FRACTION)],
    )
    for t in tiers:
        spec = cfg.tier_reinsurance[t]
        rt.add(t, spec.distribution, spec.loss_ratio, *rates[t])
    rho.notes.append(
        f"premium={cfg.rho_premium}, capital={cfg.rho_capital} (simulated, per contract), "
        f"commission={cfg.rho_commission}; exposure is the contract limit"
    )

    for c in cfg.contracts:
        sev = lognormal_from_moments(c.severity, s.convention)
        ceilings.add(label(c), *[c.ceilings[t] for t in tiers], *[c.max_customers[t] for t in tiers])
        specs.add(label(c), c.severity.mean, c.severity.sd, sev.mu_log, sev.sigma_log, *[c.lambdas[t] for t in tiers])

        totals, per_contract, stress_total, stress_per = {}, {}, {}, {}
        for t in tiers:
            port = tier_portfolio(c, t)
            sample = simulate_portfolio_losses(
                port, s.runs, campaign_seed(s, f"buyer_tiers/{t}/{c.limit!r}"), convention=s.convention, threads=s.threads
            )
            totals[t] = sample.mean
            per_contract[t] = sample.mean / c.max_customers[t]
            claims = poisson_quantile(PoissonParams(c.lambdas[t]), cfg.stress_frequency)
            stress_total[t] = claims * float(lognormal_quantile(sev, cfg.stress_severity))
            stress_per[t] = stress_total[t] / c.max_customers[t]
        analytic = {t: c.lambdas[t] * lognormal_mean(sev) for t in tiers}
        expected.add(label(c), *totals.values(), *per_contract.values(), *analytic.values())
        # technical premium is the closed-form expected loss per contract
        tp_rates = {t: analytic[t] / c.max_customers[t] / c.limit for t in tiers}
        premium.add(
            label(c), *tp_rates.values(),
            *[ABOVE_CEILING if tp_rates[t] > c.ceilings[t] else WITHIN_CEILING for t in tiers],
        )
        for t in tiers:
            if tp_rates[t] > c.ceilings[t]:
                premium.notes.append(
                    f"{t} {label(c)}: technical premium {tp_rates[t]:.1%} exceeds the {c.ceilings[t]:.0%} ceiling"
                )
        stress.add(label(c), *stress_total.values(), *stress_per.values())

        sols = {}
        for t in tiers:
            p = tp_rates[t] * c.limit if cfg.rho_premium == "technical" else c.ceilings[t] * c.limit
            capital = per_contract[t] if cfg.rho_capital == "expected_loss" else 0.0
            if cfg.rho_commission == "ceiling_minus_reinsurer":
                cc = c.ceilings[t] - rates[t][1]
            elif cfg.rho_commission == "technical_minus_reinsurer":
                cc = tp_rates[t] - rates[t][1]
            else:
                cc = 0.0
            sols[t] = solve_rho(stress_per[t], p, capital, c.limit, cc)
        rho.add(label(c), *[v.rho for v in sols.values()], *[v.status for v in sols.values()])
        if reference is not None:
            cells = []
            for t in tiers:
                ref = c.reference_rho.get(t)
                got = sols[t].rho
                cells += [got, ref, None if ref is None else got - ref]
            reference.add(label(c), *cells)
    if reference is not None:
        reference.notes.append("reference values are shown with deltas and are not expected to match")
    return report
