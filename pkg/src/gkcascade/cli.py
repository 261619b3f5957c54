"""Command-line driver: ``gkcascade <subcommand> --prices p.csv --out dir/ ...``.

Options may also come from a JSON file passed with ``--config``; flags given
on the command line override it. Exit codes: 0 ok, 2 bad input, 1 internal
error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import cascade_det, cascade_mc, report
from .errors import InputError
from .marketdata import (
    DEFAULT_REGIONS,
    compute_log_returns,
    descriptive_stats,
    load_prices,
    load_region_map,
    normalize_prices,
)
from .netbuild import (
    FilterMode,
    apply_threshold,
    build_network,
    clustering_coefficients,
    correlation_matrix,
    exposure_matrix,
    group_degree_stats,
    volatilities,
)
from .risk import risk_report

log = logging.getLogger("gkcascade")


class UsageError(InputError):
    pass


DEFAULTS = {
    "prices": None,
    "regions": None,
    "out": None,
    "alpha": 0.95,
    "theta": None,
    "filter_mode": None,
    "seed_asset": None,
    "influence_threshold": 0.5,
    "max_iter": 10,
    "n": 1000,
    "scenario": "general",
    "shock": "uniform:0.1:0.5",
    "master_seed": 0,
    "systemic_cutoff": 5,
    "workers": 1,
    "dynamic_liabilities": False,
    "cap_losses": False,
    "er_p": None,
    "er_seed": 0,
}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--prices", help="price CSV: date,TICKER1,TICKER2,...")
    p.add_argument("--regions", help="JSON object mapping ticker -> Brazil|US|Europe|Asia")
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="JSON file with default option values")


def _theta(p, mode=True):
    p.add_argument("--theta", type=float)
    if mode:
        p.add_argument("--filter-mode", choices=[m.value for m in FilterMode])


def _mc(p):
    p.add_argument("--n", type=int, help="number of simulations")
    p.add_argument("--scenario", help="general | single:TICKER | simultaneous:T1+T2")
    p.add_argument("--shock", help="uniform[:lo:hi] | fixed:s")
    p.add_argument("--master-seed", type=int)
    p.add_argument("--systemic-cutoff", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--dynamic-liabilities", action="store_const", const=True)
    p.add_argument("--cap-losses", action="store_const", const=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gkcascade", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="descriptive statistics and normalized prices")
    _common(p)

    p = sub.add_parser("risk", help="empirical VaR / CVaR per asset")
    _common(p)
    p.add_argument("--alpha", type=float)

    p = sub.add_parser("network", help="correlation/exposure networks, clustering, DOT export")
    _common(p)
    _theta(p)

    p = sub.add_parser("cascade-det", help="deterministic threshold cascade")
    _common(p)
    _theta(p, mode=False)
    p.add_argument("--seed-asset", action="append", help="initially defaulted ticker (repeatable)")
    p.add_argument("--influence-threshold", type=float)
    p.add_argument("--max-iter", type=int)

    p = sub.add_parser("cascade-mc", help="Monte Carlo default cascades")
    _common(p)
    _theta(p)
    _mc(p)

    p = sub.add_parser("synth-compare", help="real network vs Erdos-Renyi benchmark")
    _common(p)
    _theta(p)
    _mc(p)
    p.add_argument("--er-p", type=float, help="edge probability (default: matched to real network)")
    p.add_argument("--er-seed", type=int)
    return parser


def resolve_options(args: argparse.Namespace) -> dict:
    file_opts = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            file_opts = json.load(fh)
        if not isinstance(file_opts, dict):
            raise UsageError("config file must hold a JSON object")
        file_opts = {k.replace("-", "_"): v for k, v in file_opts.items()}
    opts = {}
    for key, default in DEFAULTS.items():
        value = getattr(args, key, None)
        if value is None:
            value = file_opts.get(key, default)
        opts[key] = value
    if isinstance(opts["seed_asset"], str):
        opts["seed_asset"] = [opts["seed_asset"]]
    return opts


def _require(opts, *keys):
    missing = [k for k in keys if opts.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _load(opts):
    _require(opts, "prices", "out")
    regions = load_region_map(opts["regions"]) if opts["regions"] else DEFAULT_REGIONS
    panel = load_prices(opts["prices"], regions)
    return panel, {a.ticker: a.region for a in panel.assets}


def _finish(out: Path, opts, artifacts: dict[str, bytes], command: str):
    for name, data in artifacts.items():
        report.atomic_write(out / name, data)
    config = {k: v for k, v in opts.items() if k not in ("prices", "regions", "out")}
    config["command"] = command
    manifest = report.build_manifest(
        {"prices": opts["prices"], "regions": opts["regions"]}, config, sorted(artifacts)
    )
    report.atomic_write(out / "manifest.json", report.to_json_bytes(manifest))
    for name in sorted(artifacts):
        log.info("wrote %s", out / name)


def cmd_stats(opts):
    panel, _ = _load(opts)
    returns = compute_log_returns(panel)
    norm = normalize_prices(panel)
    return {
        "stats.csv": report.stats_csv(descriptive_stats(returns)),
        "normalized.csv": report.emit_csv(
            ["date", *panel.tickers],
            ([d.isoformat(), *norm[k].tolist()] for k, d in enumerate(panel.dates)),
        ),
    }


def cmd_risk(opts):
    panel, _ = _load(opts)
    rr = risk_report(compute_log_returns(panel), float(opts["alpha"]))
    payload = {
        "alpha": rr.alpha,
        "assets": {t: {"var": r.var, "cvar": r.cvar} for t, r in rr.per_asset.items()},
    }
    return {"risk.csv": report.risk_csv(rr), "risk.json": report.to_json_bytes(payload)}


def cmd_network(opts):
    _require(opts, "theta", "filter_mode")
    panel, regions = _load(opts)
    returns = compute_log_returns(panel)
    theta = float(opts["theta"])
    mode = FilterMode(opts["filter_mode"])
    rho = correlation_matrix(returns)
    exposures = exposure_matrix(rho, volatilities(returns), panel.final_prices)
    net = build_network(returns, theta, mode)
    # the correlation-mode graph is drawn with filtered correlations as weights
    weights = apply_threshold(rho, theta) if mode is FilterMode.CORRELATION else net.exposures
    metrics = clustering_coefficients(weights > 0, symmetrize=True)
    tickers = panel.tickers
    return {
        "correlation.csv": report.matrix_csv(rho, tickers),
        "exposures.csv": report.matrix_csv(exposures, tickers),
        "filtered.csv": report.matrix_csv(weights, tickers),
        "clustering.csv": report.emit_csv(
            ["asset", "region", "degree", "clustering"],
            ([t, regions[t], int(metrics.degree[i]), float(metrics.clustering[i])] for i, t in enumerate(tickers)),
        ),
        "degree_by_region.csv": report.emit_csv(
            ["region", "avg_degree"], [(r, v) for r, v in group_degree_stats(weights > 0, panel.assets).items()]
        ),
        "network.dot": report.emit_dot(weights, tickers, metrics, regions, name=f"{mode.value}_theta_{theta:g}"),
    }


def cmd_cascade_det(opts):
    _require(opts, "theta", "seed_asset")
    panel, _ = _load(opts)
    theta = float(opts["theta"])
    targets = [t for item in opts["seed_asset"] for t in str(item).split(",") if t]
    filtered = apply_threshold(correlation_matrix(compute_log_returns(panel)), theta)
    trace = cascade_det.run(
        panel.tickers,
        filtered,
        targets,
        influence_threshold=float(opts["influence_threshold"]),
        max_iterations=int(opts["max_iter"]),
        theta=theta,
    )
    return {"trace.csv": report.trace_csv(trace), "trace.json": report.to_json_bytes(report.trace_json(trace))}


def _mc_setup(opts):
    _require(opts, "theta", "filter_mode")
    panel, _ = _load(opts)
    theta = float(opts["theta"])
    mode = FilterMode(opts["filter_mode"])
    try:
        scenario = cascade_mc.ShockScenario.parse(
            str(opts["scenario"]), cascade_mc.parse_magnitude(str(opts["shock"]))
        )
        config = cascade_mc.McConfig(
            n_simulations=int(opts["n"]),
            theta=theta,
            filter_mode=mode,
            systemic_cutoff=int(opts["systemic_cutoff"]),
            master_seed=int(opts["master_seed"]),
            dynamic_liabilities=bool(opts["dynamic_liabilities"]),
            cap_losses=bool(opts["cap_losses"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    network = build_network(compute_log_returns(panel), theta, mode)
    return panel, network, config, scenario


def cmd_cascade_mc(opts):
    panel, network, config, scenario = _mc_setup(opts)
    rep = cascade_mc.monte_carlo(config, scenario, network, panel.assets, workers=int(opts["workers"]))
    return {
        "mc_report.json": report.to_json_bytes(rep.to_dict()),
        "mc_report.csv": report.mc_csv([rep]),
        "mc_regions.csv": report.region_csv(rep),
    }


def cmd_synth_compare(opts):
    panel, network, config, scenario = _mc_setup(opts)
    er_p = None if opts["er_p"] is None else float(opts["er_p"])
    if er_p is not None and not 0.0 <= er_p <= 1.0:
        raise UsageError("--er-p must lie in [0, 1]")
    cmp = cascade_mc.compare_synthetic(
        config, scenario, network, panel.assets, er_p=er_p, er_seed=int(opts["er_seed"]),
        workers=int(opts["workers"]),
    )
    return {
        "synth_compare.json": report.to_json_bytes(cmp.to_dict()),
        "synth_compare.csv": report.synthetic_csv(cmp),
    }


COMMANDS = {
    "stats": cmd_stats,
    "risk": cmd_risk,
    "network": cmd_network,
    "cascade-det": cmd_cascade_det,
    "cascade-mc": cmd_cascade_mc,
    "synth-compare": cmd_synth_compare,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        opts = resolve_options(args)
        artifacts = COMMANDS[args.command](opts)
        _finish(Path(opts["out"]), opts, artifacts, args.command)
    except (InputError, OSError, json.JSONDecodeError) as exc:
        print(f"gkcascade: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"gkcascade: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
