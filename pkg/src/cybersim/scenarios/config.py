"""Scenario configuration files.

A scenario is described by one TOML file. Currency fields accept plain
numbers or strings such as ``"500k"``, ``"1.25mn"`` or ``"53.1e6"``. All
problems found while reading a file are collected and raised together as a
:class:`ConfigError`, each prefixed with the dotted path of the offending key.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..reinsurance import XLTerms
from ..stochastic import CONVENTIONS, DEFAULT_RUNS, MAX_SEED, PAPER, CashMoments, DomainError, LogNormalParams
from ..underwriting import ContractSpec
from ..units import parse_currency

SCENARIOS = ("benchmark", "panel", "buyer_tiers", "naic_report")


class ConfigError(ValueError):
    def __init__(self, errors: list[str], source: str = "<config>"):
        self.errors = list(errors)
        self.source = source
        super().__init__(f"{source}: {len(errors)} problem(s)\n" + "\n".join(f"  {e}" for e in errors))


_MISSING = object()


class _Reader:
    """Typed access to a nested mapping, accumulating errors by path."""

    def __init__(self, data: Any, path: str, errors: list[str]):
        self.data = data if isinstance(data, dict) else {}
        self.path = path
        self.errors = errors
        if not isinstance(data, dict):
            self.fail("", "must be a table")

    def _key(self, key) -> str:
        key = str(key)
        return f"{self.path}.{key}" if self.path and key else (self.path or key)

    def fail(self, key, message: str):
        self.errors.append(f"{self._key(key) or '<root>'}: {message}")

    def raw(self, key, default=_MISSING):
        if key in self.data:
            return self.data[key]
        if default is _MISSING:
            self.fail(key, "is required")
            return None
        return default

    def sub(self, key, default=_MISSING) -> _Reader:
        value = self.raw(key, {} if default is not _MISSING else _MISSING)
        return _Reader(value if value is not None else {}, self._key(key), self.errors)

    def items(self, key) -> list[_Reader]:
        value = self.raw(key)
        if value is None:
            return []
        if not isinstance(value, list):
            self.fail(key, "must be an array of tables")
            return []
        return [_Reader(v, f"{self._key(key)}[{i}]", self.errors) for i, v in enumerate(value)]

    def number(self, key, default=_MISSING, *, lo=None, hi=None, lo_open=False, integer=False):
        value = self.raw(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(key, f"must be a number, got {value!r}")
            return None
        if integer and int(value) != value:
            self.fail(key, f"must be an integer, got {value!r}")
            return None
        if lo is not None and (value <= lo if lo_open else value < lo):
            self.fail(key, f"must be {'>' if lo_open else '>='} {lo}, got {value!r}")
        if hi is not None and value > hi:
            self.fail(key, f"must be <= {hi}, got {value!r}")
        return int(value) if integer else float(value)

    def probability(self, key, default=_MISSING, *, open_low=False):
        return self.number(key, default, lo=0.0, hi=1.0, lo_open=open_low)

    def currency(self, key, default=_MISSING, *, positive=False):
        value = self.raw(key, default)
        if value is None:
            return None
        try:
            amount = parse_currency(value)
        except ValueError as exc:
            self.fail(key, str(exc))
            return None
        if positive and not amount > 0:
            self.fail(key, f"must be > 0, got {value!r}")
        elif amount < 0:
            self.fail(key, f"must be >= 0, got {value!r}")
        return amount

    def string(self, key, default=_MISSING, *, choices=None):
        value = self.raw(key, default)
        if value is None:
            return None
        if not isinstance(value, str):
            self.fail(key, f"must be a string, got {value!r}")
            return None
        if choices is not None and value not in choices:
            self.fail(key, f"must be one of {', '.join(choices)}; got {value!r}")
        return value

    def numbers(self, key, default=_MISSING, **bounds) -> list:
        value = self.raw(key, default)
        if value is None:
            return []
        if not isinstance(value, list):
            self.fail(key, "must be an array")
            return []
        holder = _Reader({i: v for i, v in enumerate(value)}, self._key(key), self.errors)
        return [holder.number(i, **bounds) for i in range(len(value))]

    def moments(self, key) -> CashMoments | None:
        r = self.sub(key)
        mean, sd = r.currency("mean", positive=True), r.currency("sd")
        if mean is None or sd is None:
            return None
        return CashMoments(mean, sd)


@dataclass(frozen=True)
class RunSettings:
    runs: int = DEFAULT_RUNS
    seed: int = 0
    threads: int | None = None
    output_dir: str = "out"
    convention: str = PAPER


@dataclass(frozen=True)
class BenchmarkConfig:
    settings: RunSettings
    policies: int
    limit: float
    severity: CashMoments
    claim_probabilities: tuple[float, ...]
    risk_aversion: float
    wealth: float
    loss_size: float
    deductible: float
    grid_step: float
    fit_probability: float
    fitted: LogNormalParams
    layers: tuple[XLTerms, ...]
    capped_mode: str
    histogram_bin: float
    scenario: str = "benchmark"


@dataclass(frozen=True)
class InsurerSpec:
    name: str
    counts: tuple[int, ...]
    capital: float | None = None


@dataclass(frozen=True)
class PanelConfig:
    settings: RunSettings
    contracts: tuple[ContractSpec, ...]
    insurers: tuple[InsurerSpec, ...]
    target_loss_ratio: float
    reinsurer_distributions: tuple[tuple[str, CashMoments], ...]
    loss_ratios: tuple[float, ...]
    max_cover: float
    quote_distribution: str
    quote_loss_ratio: float
    quote_rounding: float
    stress_levels: tuple[float, ...]
    xl_level: float
    rho_grid: tuple[float, ...]
    loss_ratio_grid: tuple[float, ...]
    histogram_bin: float
    scenario: str = "panel"


@dataclass(frozen=True)
class TierContract:
    limit: float
    severity: CashMoments
    max_customers: dict[str, int]
    ceilings: dict[str, float]
    lambdas: dict[str, float]
    reference_rho: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class TierReinsurance:
    distribution: str
    loss_distribution: CashMoments
    loss_ratio: float


@dataclass(frozen=True)
class BuyerTiersConfig:
    settings: RunSettings
    tiers: tuple[str, ...]
    contracts: tuple[TierContract, ...]
    stress_frequency: float
    stress_severity: float
    tier_reinsurance: dict[str, TierReinsurance]
    max_cover: float
    quote_rounding: float
    rho_premium: str
    rho_capital: str
    rho_commission: str
    scenario: str = "buyer_tiers"


@dataclass(frozen=True)
class NaicConfig:
    settings: RunSettings
    data_path: str | None
    headline_year: int
    scenario: str = "naic_report"


ScenarioConfig = BenchmarkConfig | PanelConfig | BuyerTiersConfig | NaicConfig


def _settings(r: _Reader) -> RunSettings:
    threads = r.number("threads", None, lo=1, integer=True)
    return RunSettings(
        runs=r.number("runs", DEFAULT_RUNS, lo=1, integer=True) or DEFAULT_RUNS,
        seed=r.number("seed", 0, lo=0, hi=MAX_SEED, integer=True) or 0,
        threads=threads,
        output_dir=r.string("output_dir", "out") or "out",
        convention=r.string("sigma_convention", PAPER, choices=CONVENTIONS) or PAPER,
    )


def _benchmark(r: _Reader, settings: RunSettings) -> BenchmarkConfig:
    market, buyer, re, plots = r.sub("market"), r.sub("buyer"), r.sub("reinsurance"), r.sub("plots", {})
    layers = []
    for lr in re.items("layers"):
        b, a = lr.currency("attachment", positive=True), lr.currency("layer", positive=True)
        if a is not None and b is not None:
            layers.append(XLTerms(b, a))
    fitted = re.sub("fitted")
    mu, sigma = fitted.number("mu_log"), fitted.number("sigma_log", lo=0)
    return BenchmarkConfig(
        settings=settings,
        policies=market.number("policies", lo=1, integer=True),
        limit=market.currency("limit", positive=True),
        severity=market.moments("severity"),
        claim_probabilities=tuple(market.numbers("claim_probabilities", lo=0, hi=1)),
        risk_aversion=buyer.number("risk_aversion", lo=0, lo_open=True),
        wealth=buyer.currency("wealth", positive=True),
        loss_size=buyer.currency("loss_size"),
        deductible=buyer.currency("deductible", 0),
        grid_step=buyer.currency("grid_step", positive=True),
        fit_probability=re.probability("claim_probability"),
        fitted=LogNormalParams(mu, sigma) if mu is not None and sigma is not None else None,
        layers=tuple(layers),
        capped_mode=re.string("capped_mode", "zero", choices=("zero", "subtract")),
        histogram_bin=plots.currency("histogram_bin", 500_000, positive=True),
    )


def _panel(r: _Reader, settings: RunSettings) -> PanelConfig:
    contracts = []
    for c in r.items("contracts"):
        limit, sev = c.currency("limit", positive=True), c.moments("severity")
        prob = c.probability("claim_probability")
        if limit is None or sev is None or prob is None:
            continue
        try:
            contracts.append(ContractSpec(limit, sev, claim_probability=prob, name=c.string("name", "")))
        except DomainError as exc:
            c.fail("", str(exc))
    insurers = []
    for i in r.items("insurers"):
        counts = i.numbers("counts", lo=0, integer=True)
        if len(counts) != len(contracts):
            i.fail("counts", f"needs one count per contract ({len(contracts)}), got {len(counts)}")
        insurers.append(InsurerSpec(i.string("name"), tuple(counts), i.currency("capital", None)))
    re = r.sub("reinsurer")
    dists = []
    for d in re.items("distributions"):
        m = d.moments("losses")
        dists.append((d.string("name"), m))
    names = [n for n, _ in dists]
    quote = re.sub("quote")
    quote_dist = quote.string("distribution")
    if quote_dist is not None and quote_dist not in names:
        quote.fail("distribution", f"unknown distribution {quote_dist!r}; known: {', '.join(map(str, names))}")
    stress, plots = r.sub("stress"), r.sub("plots", {})
    return PanelConfig(
        settings=settings,
        contracts=tuple(contracts),
        insurers=tuple(insurers),
        target_loss_ratio=r.probability("target_loss_ratio", open_low=True),
        reinsurer_distributions=tuple(dists),
        loss_ratios=tuple(re.numbers("loss_ratios", lo=0, hi=1, lo_open=True)),
        max_cover=re.currency("max_cover", positive=True),
        quote_distribution=quote_dist,
        quote_loss_ratio=quote.probability("loss_ratio", open_low=True),
        quote_rounding=quote.number("rounding", 0.01, lo=0),
        stress_levels=tuple(stress.numbers("levels", lo=0, hi=1, lo_open=True)),
        xl_level=stress.probability("xl_level", open_low=True),
        rho_grid=tuple(plots.numbers("rho_grid", [0.0, 0.2, 0.4, 0.6, 0.8, 1.0], lo=0, hi=1)),
        loss_ratio_grid=tuple(plots.numbers("loss_ratio_grid", [0.1 * k for k in range(1, 11)], lo=0, hi=1, lo_open=True)),
        histogram_bin=plots.currency("histogram_bin", 500_000, positive=True),
    )


def _per_tier(r: _Reader, key, tiers, **bounds) -> dict:
    values = r.numbers(key, **bounds)
    if len(values) != len(tiers):
        r.fail(key, f"needs one value per tier ({len(tiers)}), got {len(values)}")
    return dict(zip(tiers, values))


def _buyer_tiers(r: _Reader, settings: RunSettings) -> BuyerTiersConfig:
    tiers = tuple(r.raw("tiers") or ())
    contracts = []
    for c in r.items("contracts"):
        reference = {}
        if "reference_rho" in c.data:
            reference = _per_tier(c, "reference_rho", tiers, lo=0, hi=1)
        contracts.append(
            TierContract(
                limit=c.currency("limit", positive=True),
                severity=c.moments("severity"),
                max_customers={k: int(v) for k, v in _per_tier(c, "max_customers", tiers, lo=1, integer=True).items() if v is not None},
                ceilings=_per_tier(c, "ceilings", tiers, lo=0, hi=1),
                lambdas=_per_tier(c, "lambdas", tiers, lo=0),
                reference_rho=reference,
            )
        )
    re = r.sub("reinsurer")
    tier_re = {}
    for tier in tiers:
        t = re.sub(tier)
        tier_re[tier] = TierReinsurance(t.string("distribution", ""), t.moments("losses"), t.probability("loss_ratio", open_low=True))
    stress, rho = r.sub("stress"), r.sub("rho", {})
    return BuyerTiersConfig(
        settings=settings,
        tiers=tiers,
        contracts=tuple(contracts),
        stress_frequency=stress.probability("frequency", open_low=True),
        stress_severity=stress.probability("severity", open_low=True),
        tier_reinsurance=tier_re,
        max_cover=re.currency("max_cover", positive=True),
        quote_rounding=re.number("rounding", 0.01, lo=0),
        rho_premium=rho.string("premium", "technical", choices=("technical", "ceiling")),
        rho_capital=rho.string("capital", "expected_loss", choices=("expected_loss", "zero")),
        rho_commission=rho.string(
            "commission", "ceiling_minus_reinsurer", choices=("ceiling_minus_reinsurer", "technical_minus_reinsurer", "zero")
        ),
    )


def _naic(r: _Reader, settings: RunSettings) -> NaicConfig:
    data = r.string("data", "bundled")
    return NaicConfig(settings, None if data == "bundled" else data, r.number("headline_year", 2021, integer=True))


_BUILDERS = {"benchmark": _benchmark, "panel": _panel, "buyer_tiers": _buyer_tiers, "naic_report": _naic}


def parse_config(data: dict, source: str = "<config>") -> ScenarioConfig:
    errors: list[str] = []
    r = _Reader(data, "", errors)
    scenario = r.string("scenario", choices=SCENARIOS)
    if scenario not in _BUILDERS:
        raise ConfigError(errors, source)
    settings = _settings(r)
    try:
        cfg = _BUILDERS[scenario](r, settings)
    except (DomainError, TypeError) as exc:
        errors.append(f"<root>: {exc}")
        cfg = None
    if errors:
        raise ConfigError(errors, source)
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"<root>: invalid TOML: {exc}"], str(path)) from None
    except OSError as exc:
        raise ConfigError([f"<root>: cannot read file: {exc}"], str(path)) from None
    cfg = parse_config(data, str(path))
    if isinstance(cfg, NaicConfig) and cfg.data_path is not None and not Path(cfg.data_path).is_absolute():
        cfg = replace(cfg, data_path=str(path.parent / cfg.data_path))
    return cfg


def default_config_path(scenario: str) -> Path:
    if scenario not in SCENARIOS:
        raise ConfigError([f"scenario: must be one of {', '.join(SCENARIOS)}; got {scenario!r}"])
    return Path(str(resources.files("cybersim") / "data" / "configs" / f"{scenario}.toml"))


def default_config(scenario: str) -> ScenarioConfig:
    return load_config(default_config_path(scenario))


def with_overrides(cfg: ScenarioConfig, **overrides) -> ScenarioConfig:
    """Replace run settings (``runs``, ``seed``, ``threads``, ``output_dir``, ``convention``)."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    if "runs" in changes and changes["runs"] < 1:
        raise ConfigError([f"runs: must be >= 1, got {changes['runs']}"])
    if "seed" in changes and not 0 <= changes["seed"] <= MAX_SEED:
        raise ConfigError([f"seed: must lie in [0, 2**64), got {changes['seed']}"])
    return replace(cfg, settings=replace(cfg.settings, **changes))
