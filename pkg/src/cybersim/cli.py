"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 golden comparison failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .reinsurance import ReinsurerView, XLTerms, ceding_commission, reinsurance_rate, solve_rho, xl_rate_by_exceedance
from .stochastic import (
    CONVENTIONS,
    MAX_SEED,
    PAPER,
    CashMoments,
    DomainError,
    LogNormalParams,
    NumericError,
    fit_lognormal,
    lognormal_cdf,
    lognormal_from_moments,
    lognormal_sf,
    truncated_expectation,
)
from .underwriting import (
    ContractSpec,
    Holding,
    Portfolio,
    loading,
    premium_written,
    simulate_portfolio_losses,
    stress_loss,
    technical_premium,
    technical_rate,
)
from .units import parse_currency

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_GOLDEN = 2

SEED_ENV = "CYBERSIM_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _currency(text: str) -> float:
    try:
        return parse_currency(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def resolve_seed(flag: int | None, default: int | None = None) -> int | None:
    """``--seed`` wins, then ``CYBERSIM_SEED``, then ``default``."""
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return _seed(env)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{SEED_ENV}: {exc}") from None
    return default


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    p.add_argument("--seed", type=_seed, help=f"random seed (falls back to ${SEED_ENV}, then the config)")
    p.add_argument("--threads", type=_positive_int, help="cap on parallel simulation workers (default: all cores)")
    return p


def _scenario_source(p: argparse.ArgumentParser) -> None:
    from .scenarios import SCENARIOS

    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--scenario", choices=SCENARIOS, help="run a bundled scenario")
    g.add_argument("--config", type=Path, help="scenario config file (TOML)")
    p.add_argument("--runs", type=_positive_int, help="override the Monte Carlo run count")
    p.add_argument("--convention", choices=CONVENTIONS, help="log-normal sigma convention")


def _distribution_args(p: argparse.ArgumentParser, what: str) -> None:
    p.add_argument("--mean", type=_currency, help=f"mean of {what}")
    p.add_argument("--sd", type=_currency, help=f"standard deviation of {what}")
    p.add_argument("--mu", type=float, help="log-scale location (instead of --mean/--sd)")
    p.add_argument("--sigma", type=float, help="log-scale spread (instead of --mean/--sd)")
    p.add_argument("--convention", choices=CONVENTIONS, default=PAPER, help="sigma convention for --mean/--sd")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="cybersim", description="Cyber-insurance market simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("run", parents=[common], help="run a scenario and write its report")
    _scenario_source(p)
    p.add_argument("--output", type=Path, help="output directory (default: the config's output_dir)")
    p.add_argument("--no-write", action="store_true", help="print only; write no files")

    p = sub.add_parser("compare", parents=[common], help="run a scenario and diff it against golden tables")
    _scenario_source(p)
    p.add_argument("--golden", type=Path, help="directory of golden CSVs (default: bundled)")
    p.add_argument("--report", type=Path, help="compare an existing report.json instead of running")

    p = sub.add_parser("price", parents=[common], help="price a block of identical contracts")
    p.add_argument("--limit", type=_currency, required=True)
    p.add_argument("--mean", type=_currency, required=True, help="mean claim severity")
    p.add_argument("--sd", type=_currency, required=True, help="claim severity standard deviation")
    freq = p.add_mutually_exclusive_group(required=True)
    freq.add_argument("--claim-probability", type=_probability, help="claim probability per policy")
    freq.add_argument("--lambda", dest="lam", type=float, help="expected claims per policy")
    p.add_argument("--count", type=_positive_int, default=1, help="number of policies (default 1)")
    p.add_argument("--target-lr", type=float, default=0.5, help="target loss ratio (default 0.5)")
    p.add_argument("--runs", type=_positive_int, default=100_000)
    p.add_argument("--stress", type=float, nargs="*", default=[0.95, 0.975], help="stress quantile levels")
    p.add_argument("--convention", choices=CONVENTIONS, default=PAPER)

    p = sub.add_parser("quote-xl", parents=[common], help="excess-of-loss layer on a log-normal total loss")
    p.add_argument("--attachment", type=_currency, required=True)
    p.add_argument("--layer", type=_currency, required=True)
    _distribution_args(p, "total losses")

    p = sub.add_parser("quote-qs", parents=[common], help="quota-share rate for a target loss ratio")
    _distribution_args(p, "pooled losses")
    p.add_argument("--loss-ratio", type=float, required=True, help="reinsurer target loss ratio")
    p.add_argument("--max-cover", type=_currency, default=500e6, help="total cover (default 500mn)")
    p.add_argument("--round", type=float, default=0.0, help="quote the rate to this step, e.g. 0.01")
    p.add_argument("--charged-rate", type=float, help="cedent's average premium rate, to report the ceding commission")

    p = sub.add_parser("optimal-rho", parents=[common], help="ceded fraction that keeps the cedent solvent")
    p.add_argument("--stress", type=_currency, required=True, help="stress loss")
    p.add_argument("--premium", type=_currency, required=True, help="premium written")
    p.add_argument("--capital", type=_currency, required=True)
    p.add_argument("--exposure", type=_currency, required=True)
    p.add_argument("--cc", type=float, required=True, help="ceding commission as a fraction of exposure")

    p = sub.add_parser("fit", parents=[common], help="log-normal parameters from samples or cash moments")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--samples", type=Path, help="CSV or plain text of positive amounts")
    g.add_argument("--mean", type=_currency, help="cash mean (with --sd)")
    p.add_argument("--sd", type=_currency)
    p.add_argument("--column", help="CSV column holding the samples (default: first)")
    p.add_argument("--convention", choices=CONVENTIONS, default=PAPER)

    p = sub.add_parser("naic", parents=[common], help="market loss-ratio report from NAIC records")
    p.add_argument("--data", type=Path, help="CSV with firm,year,dwp_usd_mn,loss_ratio (default: bundled)")
    p.add_argument("--year", type=int, help="show only this year")
    return parser


# -- output ----------------------------------------------------------------


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return "-"
    return str(value)


def emit(result: dict, as_json: bool, out) -> None:
    """Flat key/value result; the human form prints the same values JSON carries."""
    if as_json:
        out.write(json.dumps(result, indent=2, allow_nan=False) + "\n")
        return
    width = max(len(k) for k in result)
    for k, v in result.items():
        out.write(f"{k.ljust(width)}  {_format(v)}\n")


def parse_human(text: str) -> dict:
    """Inverse of the human form of :func:`emit`, for round-trip checks."""
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, raw = line.partition("  ")
        raw = raw.strip()
        if raw == "-":
            value = None
        else:
            try:
                value = int(raw)
            except ValueError:
                try:
                    value = float(raw)
                except ValueError:
                    value = raw
        out[key.strip()] = value
    return out


def _clean(value):
    return None if isinstance(value, float) and not math.isfinite(value) else value


# -- commands ----------------------------------------------------------------


def _load_scenario(args):
    from .scenarios import default_config, load_config, with_overrides

    cfg = default_config(args.scenario) if args.scenario else load_config(args.config)
    seed = resolve_seed(args.seed)
    return with_overrides(cfg, seed=seed, runs=args.runs, threads=args.threads, convention=args.convention)


def cmd_run(args, out) -> int:
    from .scenarios import run_scenario
    from .scenarios.report import render_text

    cfg = _load_scenario(args)
    report = run_scenario(cfg)
    if not args.no_write:
        outdir = args.output if args.output is not None else Path(cfg.settings.output_dir)
        written = report.write(outdir)
        print(f"wrote {len(written)} files to {outdir}", file=sys.stderr)
    out.write(report.to_json() if args.json else render_text(report))
    return EXIT_OK


def cmd_compare(args, out) -> int:
    from .scenarios import GOLDEN_IDS, compare_to_golden, run_scenario
    from .scenarios.golden import load_goldens, render_diff
    from .scenarios.report import Report

    if args.report is not None:
        report = Report.load(args.report)
    else:
        report = run_scenario(_load_scenario(args))
    ids = GOLDEN_IDS.get(report.scenario, ())
    tables = load_goldens(args.golden, ids)
    if not tables:
        raise UsageError(f"no golden tables for scenario {report.scenario!r} in {args.golden or 'bundled goldens'}")
    diff = compare_to_golden(report, tables)
    out.write(json.dumps(diff.to_dict(), indent=2, allow_nan=False) + "\n" if args.json else render_diff(diff))
    return EXIT_OK if diff.passed else EXIT_GOLDEN


def cmd_price(args, out) -> int:
    contract = ContractSpec(
        args.limit,
        CashMoments(args.mean, args.sd),
        claim_probability=args.claim_probability,
        frequency_lambda=args.lam,
    )
    port = Portfolio("cli", (Holding(contract, args.count),), args.target_lr)
    tp = technical_premium(port)
    seed = resolve_seed(args.seed, 0)
    sample = simulate_portfolio_losses(port, args.runs, seed, convention=args.convention, threads=args.threads)
    sev = contract.severity_params(args.convention)
    result = {
        "mu_log": sev.mu_log,
        "sigma_log": sev.sigma_log,
        "exposure": port.exposure,
        "technical_premium": tp,
        "technical_rate": technical_rate(port),
        "loading": loading(tp, args.target_lr, port.exposure),
        "premium_written": premium_written(port),
        "simulated_mean": sample.mean,
        "simulated_sd": sample.sd,
        "runs": args.runs,
        "seed": seed,
    }
    for q in args.stress:
        result[f"stress_{q:g}"] = stress_loss(port, q, q, args.convention).total_loss
    emit(result, args.json, out)
    return EXIT_OK


def _distribution(args) -> LogNormalParams:
    if args.mu is not None or args.sigma is not None:
        if args.mu is None or args.sigma is None or args.mean is not None or args.sd is not None:
            raise UsageError("give either --mu and --sigma, or --mean and --sd")
        return LogNormalParams(args.mu, args.sigma)
    if args.mean is None or args.sd is None:
        raise UsageError("give either --mu and --sigma, or --mean and --sd")
    return lognormal_from_moments(CashMoments(args.mean, args.sd), args.convention)


def expected_layer_payout(dist: LogNormalParams, terms: XLTerms) -> float:
    """E[min((L - B)+, A)] from partial expectations of the loss curve."""
    b, top = terms.attachment, terms.exhaustion
    in_layer = truncated_expectation(dist, top) - truncated_expectation(dist, b)
    prob_in = float(lognormal_cdf(dist, top) - lognormal_cdf(dist, b))
    return in_layer - b * prob_in + terms.layer * float(lognormal_sf(dist, top))


def cmd_quote_xl(args, out) -> int:
    dist = _distribution(args)
    terms = XLTerms(args.attachment, args.layer)
    rate = xl_rate_by_exceedance(dist, terms)
    emit(
        {
            "mu_log": dist.mu_log,
            "sigma_log": dist.sigma_log,
            "attachment": terms.attachment,
            "layer": terms.layer,
            "rate": rate,
            "premium": rate * terms.layer,
            "expected_indemnity": expected_layer_payout(dist, terms),
        },
        args.json,
        out,
    )
    return EXIT_OK


def cmd_quote_qs(args, out) -> int:
    dist = _distribution(args)
    view = ReinsurerView(dist, args.loss_ratio, args.max_cover)
    rate = reinsurance_rate(view)
    quoted = round(rate / args.round) * args.round if args.round > 0 else rate
    result = {
        "mu_log": dist.mu_log,
        "sigma_log": dist.sigma_log,
        "expected_losses": truncated_expectation(dist, args.max_cover),
        "rate": rate,
        "quoted_rate": quoted,
        "premium": quoted * args.max_cover,
    }
    if args.charged_rate is not None:
        result["ceding_commission"] = ceding_commission(args.charged_rate, quoted)
    emit(result, args.json, out)
    return EXIT_OK


def cmd_optimal_rho(args, out) -> int:
    sol = solve_rho(args.stress, args.premium, args.capital, args.exposure, args.cc)
    emit({"rho": _clean(sol.rho), "unclamped": _clean(sol.unclamped), "status": sol.status}, args.json, out)
    return EXIT_OK


def _read_samples(path: Path, column: str | None) -> list[float]:
    text = path.read_text(encoding="utf-8")
    rows = list(csv.reader(text.splitlines()))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise UsageError(f"{path}: no samples")
    header = rows[0]
    try:
        [float(c) for c in header[:1]]
        has_header = False
    except ValueError:
        has_header = True
    if column is not None and not has_header:
        raise UsageError(f"{path}: --column given but the file has no header row")
    idx = header.index(column) if column is not None and column in header else 0
    if column is not None and column not in header:
        raise UsageError(f"{path}: no column {column!r}")
    values = []
    for n, r in enumerate(rows[1:] if has_header else rows, start=2 if has_header else 1):
        try:
            values.append(parse_currency(r[idx].strip()))
        except (ValueError, IndexError):
            raise UsageError(f"{path}: row {n}: not an amount: {r!r}") from None
    return values


def cmd_fit(args, out) -> int:
    if args.samples is not None:
        samples = _read_samples(args.samples, args.column)
        params = fit_lognormal(samples)
        result = {"source": "samples", "n": len(samples)}
    else:
        if args.sd is None:
            raise UsageError("--mean needs --sd")
        params = lognormal_from_moments(CashMoments(args.mean, args.sd), args.convention)
        result = {"source": f"moments/{args.convention}"}
    result.update({"mu_log": params.mu_log, "sigma_log": params.sigma_log, "mean": params.mean, "median": params.median})
    emit(result, args.json, out)
    return EXIT_OK


def cmd_naic(args, out) -> int:
    from .scenarios.naic import load_naic_records, weighted_loss_ratio, zero_intercept_slope

    records = load_naic_records(args.data)
    years = sorted({r.year for r in records})
    if args.year is not None:
        if args.year not in years:
            raise UsageError(f"no records for {args.year}; years present: {', '.join(map(str, years))}")
        years = [args.year]
    result = {}
    for y in years:
        rows = [r for r in records if r.year == y]
        result[f"{y}_firms"] = len(rows)
        result[f"{y}_total_dwp"] = sum(r.dwp for r in rows)
        result[f"{y}_weighted_loss_ratio"] = weighted_loss_ratio(rows)
        result[f"{y}_trend_slope"] = zero_intercept_slope(rows)
    emit(result, args.json, out)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "price": cmd_price,
    "quote-xl": cmd_quote_xl,
    "quote-qs": cmd_quote_qs,
    "optimal-rho": cmd_optimal_rho,
    "fit": cmd_fit,
    "naic": cmd_naic,
}


def main(argv=None, out=None) -> int:
    from .scenarios.config import ConfigError
    from .scenarios.golden import GoldenError

    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"cybersim: invalid config {exc.source}:", file=sys.stderr)
        for e in exc.errors:
            print(f"  {e}", file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, DomainError, NumericError, GoldenError, OSError, ValueError) as exc:
        print(f"cybersim: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
