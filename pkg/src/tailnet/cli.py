"""Command-line entry point.

Subcommands run one pipeline stage each against an artifact directory;
``run`` chains ingest through score (plus optional exports). Settings
resolve flag > environment (TAILNET_*) > config file > default.

Exit codes: 0 success, 1 computation error, 2 input/config error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from tailnet import synthlab as syn
from tailnet import pipeline as pl
from tailnet.errors import InputError, TailnetError


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--out", help="artifact directory (default 'out')")
    parser.add_argument("--force", action="store_true",
                        help="use upstream artifacts even if their digests changed")
    parser.add_argument("-v", "--verbose", action="store_true")


def _flag(parser, name, **kwargs):
    """Tri-state option: absent means 'do not override lower layers'."""
    if kwargs.pop("boolean", False):
        parser.add_argument(name, action="store_const", const=True, default=None, **kwargs)
    else:
        parser.add_argument(name, default=None, **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailnet",
        description="Tail-risk linkage networks from daily price panels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse raw prices into the canonical panel")
    _add_common(p)
    _flag(p, "--input", help="raw price file")
    _flag(p, "--format", choices=["prices-long", "prices-wide"])
    _flag(p, "--caps-file", dest="caps_file", help="market-cap sibling for prices-wide")
    _flag(p, "--symbols", help="comma-separated subset")
    _flag(p, "--start", help="first date (ISO)")
    _flag(p, "--end", help="last date (ISO)")
    _flag(p, "--gap-policy", dest="gap_policy", choices=["forward-fill", "drop-asset"])
    _flag(p, "--max-gap", dest="max_gap", help="longest forward-fillable gap in days")
    _flag(p, "--gap-on-exceed", dest="gap_on_exceed", choices=["drop", "error"])
    _flag(p, "--simple-returns", dest="simple_returns", boolean=True,
          help="price ratio minus one instead of log returns")

    p = sub.add_parser("simulate", help="generate a synthetic panel as the panel stage")
    _add_common(p)
    p.add_argument("--preset", default="baseline",
                   choices=["baseline", "tether-like", "mixed"])
    p.add_argument("--assets", type=int, default=25)
    p.add_argument("--horizon", type=int, default=1460)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--neg-count", type=int, default=None,
                   help="how many assets load negatively on the factor")
    p.add_argument("--factor-vol", type=float, default=0.04)
    p.add_argument("--idio-vol", type=float, default=0.02)
    p.add_argument("--student-df", type=float, default=None,
                   help="Student-t innovations with this df (default Gaussian)")
    p.add_argument("--emit-prices", action="store_true",
                   help="also write the panel as a prices-long input file")

    p = sub.add_parser("coes", help="rolling CoES tensor from the panel stage")
    _add_common(p)
    _flag(p, "--alpha", help="tail probability (default 0.05)")
    _flag(p, "--window", help="rolling window length in days (default 250)")

    p = sub.add_parser("network", help="signed adjacency from the CoES stage")
    _add_common(p)
    _flag(p, "--theta-bar", dest="theta_bar",
          help="breakpoint search trim in (0, 0.5) (default 0.1)")
    _flag(p, "--fixed-thresholds", dest="fixed_thresholds",
          help="debug fallback 'pos,neg' similarity cutoffs instead of breakpoints")
    _flag(p, "--dense-adjacency", dest="dense_adjacency", boolean=True,
          help="also write one dense matrix file per date")

    p = sub.add_parser("score", help="systemic risk series from the network stage")
    _add_common(p)
    _flag(p, "--euler-raw", dest="euler_raw", boolean=True,
          help="report doubled gradient contributions instead of additive ones")
    _flag(p, "--normalize-caps", dest="normalize_caps", boolean=True,
          help="scale caps to weights summing to 1 at each date")
    _flag(p, "--annual-table", dest="annual_table", boolean=True,
          help="also write the symbol-by-year mean contribution table")

    p = sub.add_parser("drivers", help="regress the risk score on covariates")
    _add_common(p)
    _flag(p, "--covariates", help="covariate file 'date,<name>,...'")
    _flag(p, "--lags", help="per-covariate lags 'name=7,other=0'")
    _flag(p, "--bandwidth", help="HAC lag truncation (default floor(4(T/100)^(2/9)))")
    _flag(p, "--raw-counts", dest="raw_counts", boolean=True,
          help="skip the log1p transform of case-count covariates")
    _flag(p, "--log1p", help="extra covariates to log1p-transform")

    p = sub.add_parser("export-graphml", help="write per-date GraphML networks")
    _add_common(p)
    p.add_argument("--date", default=None, help="date to export (ISO)")
    p.add_argument("--all-dates", action="store_true", help="export every date")

    p = sub.add_parser("run", help="full pipeline: ingest, coes, network, score")
    _add_common(p)
    for name, kwargs in [
        ("--input", {}), ("--format", {"choices": ["prices-long", "prices-wide"]}),
        ("--caps-file", {"dest": "caps_file"}), ("--symbols", {}),
        ("--start", {}), ("--end", {}),
        ("--gap-policy", {"dest": "gap_policy", "choices": ["forward-fill", "drop-asset"]}),
        ("--max-gap", {"dest": "max_gap"}),
        ("--gap-on-exceed", {"dest": "gap_on_exceed", "choices": ["drop", "error"]}),
        ("--simple-returns", {"dest": "simple_returns", "boolean": True}),
        ("--alpha", {}), ("--window", {}), ("--theta-bar", {"dest": "theta_bar"}),
        ("--fixed-thresholds", {"dest": "fixed_thresholds"}),
        ("--dense-adjacency", {"dest": "dense_adjacency", "boolean": True}),
        ("--euler-raw", {"dest": "euler_raw", "boolean": True}),
        ("--normalize-caps", {"dest": "normalize_caps", "boolean": True}),
        ("--annual-table", {"dest": "annual_table", "boolean": True}),
        ("--graphml", {"boolean": True}),
        ("--graphml-date", {"dest": "graphml_date"}),
        ("--covariates", {}), ("--lags", {}), ("--bandwidth", {}),
        ("--raw-counts", {"dest": "raw_counts", "boolean": True}),
        ("--log1p", {}),
    ]:
        _flag(p, name, **kwargs)

    return parser


_CONFIG_KEYS = (
    "input", "format", "caps_file", "symbols", "start", "end",
    "gap_policy", "max_gap", "gap_on_exceed", "simple_returns",
    "alpha", "window", "theta_bar", "fixed_thresholds", "dense_adjacency",
    "euler_raw", "normalize_caps", "annual_table", "graphml", "graphml_date",
    "covariates", "lags", "bandwidth", "raw_counts", "log1p", "out",
)


def _resolve(args: argparse.Namespace) -> pl.PipelineConfig:
    file_values = pl.read_config_file(args.config) if args.config else None
    overrides = {
        key: getattr(args, key)
        for key in _CONFIG_KEYS
        if getattr(args, key, None) is not None
    }
    return pl.resolve_config(file_values, overrides)


def _dispatch(args: argparse.Namespace) -> int:
    command = args.command
    if command == "export-graphml":
        if args.all_dates:
            args.graphml_date = "all"
        elif args.date is not None:
            args.graphml_date = args.date
        else:
            raise InputError("export-graphml needs --date or --all-dates")
    config = _resolve(args)
    force = args.force

    if command == "ingest":
        panel = pl.stage_ingest(config, force)
        print(f"panel: {panel.n_dates} dates x {panel.n_assets} assets -> {config.out_dir / 'panel'}")
    elif command == "simulate":
        spec = syn.preset_spec(
            args.preset,
            n_assets=args.assets,
            horizon=args.horizon,
            seed=args.seed,
            neg_count=args.neg_count,
            factor_vol=args.factor_vol,
            idio_vol=args.idio_vol,
            student_df=args.student_df,
        )
        panel = pl.stage_simulate(config, spec, emit_prices=args.emit_prices)
        print(f"simulated panel: {panel.n_dates} dates x {panel.n_assets} assets -> {config.out_dir / 'panel'}")
    elif command == "coes":
        matrices, _ = pl.stage_coes(config, force=force)
        print(f"coes: {len(matrices)} dated matrices -> {config.out_dir / 'coes'}")
    elif command == "network":
        adjacencies, _, _ = pl.stage_network(config, force=force)
        print(f"network: {len(adjacencies)} dated adjacencies -> {config.out_dir / 'network'}")
    elif command == "score":
        series = pl.stage_score(config, force=force)
        print(f"score: {series.n_dates} dates -> {config.out_dir / 'score'}")
    elif command == "drivers":
        result = pl.stage_drivers(config, force=force)
        print(f"drivers: {result.n_obs} observations, R^2 = {result.r_squared:.4f} "
              f"-> {config.out_dir / 'drivers'}")
    elif command == "export-graphml":
        outputs = pl.stage_graphml(config, force=force)
        print(f"graphml: {len(outputs)} file(s) -> {config.out_dir / 'graphml'}")
    elif command == "run":
        pl.run_pipeline(config, force)
        print(f"pipeline complete -> {config.out_dir}")
    else:  # pragma: no cover - argparse enforces the choices
        raise InputError(f"unknown command {command!r}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _dispatch(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TailnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - map anything else to a computation failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
