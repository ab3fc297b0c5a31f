"""Five-insurer panel with one reinsurer: pricing, loss simulation, stress tests,
quota-share cession and excess-of-loss quotes."""

from __future__ import annotations

import math

import numpy as np

from ..reinsurance import (
    QuotaShareTerms,
    ReinsurerView,
    XLTerms,
    ceding_commission,
    insurer_profit,
    quota_share_cost,
    reinsurance_rate,
    solve_rho,
    xl_technical_premium_from_sample,
)
from ..stochastic import lognormal_cdf, lognormal_from_moments, lognormal_pdf, lognormal_quantile
from ..underwriting import (
    Holding,
    Portfolio,
    loading,
    premium_written,
    reserves,
    simulate_portfolio_losses,
    stress_loss,
    technical_premium,
    technical_rate,
)
from ..units import money_label
from .common import campaign_seed, histogram_series, new_report
from .config import PanelConfig
from .report import COUNT, FRACTION, LABEL, NUMBER, USD, Report


def level_label(q: float) -> str:
    return f"{q:g}"


def panel_portfolios(cfg: PanelConfig) -> list[Portfolio]:
    ports = []
    for ins in cfg.insurers:
        holdings = tuple(Holding(c, n) for c, n in zip(cfg.contracts, ins.counts))
        ports.append(Portfolio(ins.name, holdings, cfg.target_loss_ratio, ins.capital))
    return ports


def quoted_reinsurance_rate(cfg: PanelConfig) -> tuple[float, float]:
    """Rate the reinsurer quotes the panel: (exact, rounded to the quoting step)."""
    moments = dict(cfg.reinsurer_distributions)[cfg.quote_distribution]
    view = ReinsurerView(lognormal_from_moments(moments, cfg.settings.convention), cfg.quote_loss_ratio, cfg.max_cover)
    exact = reinsurance_rate(view)
    if cfg.quote_rounding > 0:
        return exact, round(exact / cfg.quote_rounding) * cfg.quote_rounding
    return exact, exact


def run_panel(cfg: PanelConfig) -> Report:
    s = cfg.settings
    report = new_report(cfg.scenario, s)
    _reinsurer_tables(cfg, report)
    _contract_table(cfg, report)

    ports = panel_portfolios(cfg)
    labels = [c.name or money_label(c.limit) for c in cfg.contracts]
    pt = report.table(
        "panel_portfolios",
        "Policies written by each insurer",
        [("insurer", LABEL)] + [(f"n_{l}", COUNT) for l in labels] + [("exposure", USD), ("technical_premium", USD)],
    )
    lt = report.table(
        "loadings",
        "Loading to reach the target loss ratio",
        [
            ("insurer", LABEL),
            ("technical_premium", USD),
            ("target_loss_ratio", FRACTION),
            ("exposure", USD),
            ("technical_rate", FRACTION),
            ("loading", FRACTION),
            ("charged_rate", FRACTION),
        ],
    )
    for p in ports:
        tp = technical_premium(p)
        pt.add(p.name, *[h.count for h in p.holdings], p.exposure, tp)
        if p.exposure > 0:
            load = loading(tp, p.target_loss_ratio, p.exposure)
            lt.add(p.name, tp, p.target_loss_ratio, p.exposure, technical_rate(p), load, technical_rate(p) + load)
            report.add_series(
                "loading_vs_loss_ratio", p.name, cfg.loss_ratio_grid,
                [loading(tp, lr, p.exposure) for lr in cfg.loss_ratio_grid],
            )
        else:
            lt.add(p.name, tp, p.target_loss_ratio, 0.0, 0.0, 0.0, 0.0)

    exact_rate, re_rate = quoted_reinsurance_rate(cfg)
    levels = cfg.stress_levels
    sim = report.table(
        "simulated_losses",
        "Simulated losses, reserves and stress tests",
        [("insurer", LABEL), ("premium", USD), ("capital", USD), ("reserves", USD), ("mean", USD), ("sd", USD)]
        + [(f"stress_{level_label(q)}", USD) for q in levels],
    )
    qs = report.table(
        "quota_share",
        "Ceded fraction keeping each insurer solvent at its stress loss",
        [("insurer", LABEL), ("ceding_commission", FRACTION)]
        + [(f"rho_{level_label(q)}", FRACTION) for q in levels]
        + [(f"status_{level_label(q)}", LABEL) for q in levels]
        + [("profit_rho_0", USD)]
        + [(f"profit_rho_{level_label(q)}", USD) for q in levels],
    )
    xl = report.table(
        "xl_quotes",
        "Excess-of-loss cover from premium income up to the stress loss",
        [
            ("insurer", LABEL),
            ("attachment", USD),
            ("layer", USD),
            ("probability", FRACTION),
            ("premium", USD),
            ("expected_indemnity", USD),
            ("qs_cost", USD),
        ],
    )
    qs.notes.append(f"reinsurance rate {re_rate:.4f} (unrounded {exact_rate:.6f}); profits at the simulated mean loss")
    xl.notes.append("premium = probability of a loss inside the layer times the layer size")

    for p in ports:
        sample = simulate_portfolio_losses(
            p, s.runs, campaign_seed(s, f"panel/{p.name}"), convention=s.convention, threads=s.threads
        )
        if p.capital is None:
            p = p.with_capital(sample.mean)
        pw = premium_written(p)
        stresses = {q: stress_loss(p, q, q, s.convention).total_loss for q in levels}
        sim.add(p.name, pw, p.capital, reserves(p, pw), sample.mean, sample.sd, *stresses.values())
        histogram_series(report, "loss_histogram", p.name, sample.per_run_totals, cfg.histogram_bin)

        if p.exposure > 0:
            cc = ceding_commission(technical_rate(p) + loading(technical_premium(p), p.target_loss_ratio, p.exposure), re_rate)
            sols = {q: solve_rho(stresses[q], pw, p.capital, p.exposure, cc) for q in levels}
            profits = [
                float(insurer_profit(sample.mean, pw, p.exposure, QuotaShareTerms(sol.rho, cc, re_rate)))
                if not math.isnan(sol.rho) else None
                for sol in sols.values()
            ]
            base = float(insurer_profit(sample.mean, pw, p.exposure, QuotaShareTerms(0.0, cc, re_rate)))
            qs.add(p.name, cc, *[v.rho for v in sols.values()], *[v.status for v in sols.values()], base, *profits)
            _profit_curves(cfg, report, p, pw, cc, re_rate, sample.mean, stresses)
        else:
            sols = {}
            cc = 0.0
            qs.add(p.name, 0.0, *[0.0] * len(levels), *["not_needed"] * len(levels), 0.0, *[0.0] * len(levels))

        top = stresses[cfg.xl_level] if cfg.xl_level in stresses else stress_loss(p, cfg.xl_level, cfg.xl_level, s.convention).total_loss
        rho_top = sols[cfg.xl_level].rho if cfg.xl_level in sols else 0.0
        if top > pw and pw > 0:
            quote = xl_technical_premium_from_sample(sample, XLTerms(pw, top - pw))
            cost = quota_share_cost(sample.mean, pw, p.exposure, QuotaShareTerms(rho_top, cc, re_rate)) if not math.isnan(rho_top) else None
            xl.add(p.name, pw, top - pw, quote.probability, quote.premium, quote.expected_indemnity, cost)
        else:
            xl.add(p.name, pw, 0.0, 0.0, 0.0, 0.0, 0.0)
    return report


def _reinsurer_tables(cfg: PanelConfig, report: Report) -> None:
    conv = cfg.settings.convention
    dt = report.table(
        "reinsurer_distributions",
        "Reinsurer views of pooled losses",
        [("distribution", LABEL), ("mean", USD), ("sd", USD), ("mu_log", NUMBER), ("sigma_log", NUMBER), ("q995", USD)],
    )
    rt = report.table(
        "reinsurance_rates",
        f"Reinsurance rate by target loss ratio, cover {money_label(cfg.max_cover)}",
        [("distribution", LABEL)] + [(f"lr_{lr:g}", FRACTION) for lr in cfg.loss_ratios],
    )
    for name, m in cfg.reinsurer_distributions:
        params = lognormal_from_moments(m, conv)
        dt.add(name, m.mean, m.sd, params.mu_log, params.sigma_log, lognormal_quantile(params, 0.995))
        rt.add(name, *[reinsurance_rate(ReinsurerView(params, lr, cfg.max_cover)) for lr in cfg.loss_ratios])
        xs = np.linspace(cfg.max_cover / 1000, 300e6, 300)
        report.add_series("reinsurer_pdf", name, xs, lognormal_pdf(params, xs))
        report.add_series("reinsurer_cdf", name, xs, lognormal_cdf(params, xs))


def _contract_table(cfg: PanelConfig, report: Report) -> None:
    conv = cfg.settings.convention
    t = report.table(
        "contracts",
        "Contracts offered in the market",
        [
            ("limit_label", LABEL),
            ("limit", USD),
            ("severity_mean", USD),
            ("severity_sd", USD),
            ("claim_probability", FRACTION),
            ("expected_loss", USD),
            ("technical_rate", FRACTION),
            ("mu_log", NUMBER),
            ("sigma_log", NUMBER),
        ],
    )
    for c in cfg.contracts:
        sev = c.severity_params(conv)
        t.add(
            c.name or money_label(c.limit), c.limit, c.severity.mean, c.severity.sd, c.claim_probability,
            c.expected_loss, c.expected_loss / c.limit, sev.mu_log, sev.sigma_log,
        )


def _profit_curves(cfg, report, p, pw, cc, re_rate, mean_loss, stresses) -> None:
    top = max([mean_loss, *stresses.values()]) * 1.1
    losses = np.linspace(0.0, top, 51)
    for rho in cfg.rho_grid:
        report.add_series(
            f"profit_{p.name}", f"rho={rho:g}", losses,
            insurer_profit(losses, pw, p.exposure, QuotaShareTerms(rho, cc, re_rate)),
        )
