"""Scenario harness: config files, runners, reports and golden comparison."""

from __future__ import annotations

from .config import (
    SCENARIOS,
    BenchmarkConfig,
    BuyerTiersConfig,
    ConfigError,
    NaicConfig,
    PanelConfig,
    default_config,
    load_config,
    with_overrides,
)
from .golden import GoldenTable, compare_to_golden, load_goldens
from .report import Report

# golden tables each scenario is checked against
GOLDEN_IDS = {
    "benchmark": ("benchmark_losses", "xl_benchmark"),
    "panel": (
        "reinsurer_distributions",
        "reinsurance_rates",
        "contracts",
        "panel_portfolios",
        "loadings",
        "simulated_losses",
        "quota_share",
        "xl_quotes",
    ),
    "buyer_tiers": (
        "buyer_ceilings",
        "buyer_contracts",
        "buyer_expected_losses",
        "buyer_technical_premium",
        "buyer_stress",
        "buyer_optimal_rho_reference",
    ),
    "naic_report": ("naic_records",),
}


def run_scenario(cfg) -> Report:
    if isinstance(cfg, BenchmarkConfig):
        from .benchmark import run_benchmark

        return run_benchmark(cfg)
    if isinstance(cfg, PanelConfig):
        from .panel import run_panel

        return run_panel(cfg)
    if isinstance(cfg, BuyerTiersConfig):
        from .buyer_tiers import run_buyer_tiers

        return run_buyer_tiers(cfg)
    if isinstance(cfg, NaicConfig):
        from .naic import run_naic_report

        return run_naic_report(cfg)
    raise TypeError(f"not a scenario config: {type(cfg).__name__}")


def scenario_goldens(scenario: str, directory=None) -> list[GoldenTable]:
    return load_goldens(directory, GOLDEN_IDS[scenario])


__all__ = [
    "SCENARIOS",
    "GOLDEN_IDS",
    "ConfigError",
    "Report",
    "compare_to_golden",
    "default_config",
    "load_config",
    "run_scenario",
    "scenario_goldens",
    "with_overrides",
]
