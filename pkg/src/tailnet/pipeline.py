"""Staged pipeline: configuration, on-disk artifacts, and manifests.

Each stage writes its outputs plus a ``manifest.json`` recording its
parameters (hashed), the digests of the inputs it read, and the digests
of the files it wrote. Downstream stages verify those digests before
reading, refusing stale or mixed artifacts unless forced. Artifacts
contain no timestamps and all floats carry 17 significant digits, so
reruns with unchanged inputs are byte-identical.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import logging
import os
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from tailnet import drivers as drv
from tailnet import network as net
from tailnet import risk as rk
from tailnet import synthlab as syn
from tailnet import tail
from tailnet.errors import InputError, StaleArtifactError, TailnetError, ComputationError
from tailnet.panel import (
    GapPolicy,
    ReturnPanel,
    build_panel,
    format_float,
    load_records,
    read_panel,
    write_panel,
)

logger = logging.getLogger(__name__)

ENV_PREFIX = "TAILNET_"


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise InputError(f"not a boolean: {text!r}")


def _parse_date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise InputError(f"not an ISO date: {text!r}") from None


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved configuration; precedence flag > env > file > default."""

    input: str | None = None
    format: str = "prices-long"
    caps_file: str | None = None
    symbols: tuple[str, ...] | None = None
    start: dt.date | None = None
    end: dt.date | None = None
    gap_policy: str = "forward-fill"
    max_gap: int = 3
    gap_on_exceed: str = "drop"
    simple_returns: bool = False
    alpha: float = 0.05
    window: int = 250
    theta_bar: float = 0.1
    fixed_thresholds: tuple[float, float] | None = None
    euler_raw: bool = False
    normalize_caps: bool = False
    out: str = "out"
    graphml: bool = False
    graphml_date: str | None = None
    annual_table: bool = False
    dense_adjacency: bool = False
    covariates: str | None = None
    lags: tuple[tuple[str, int], ...] = ()
    bandwidth: int | None = None
    raw_counts: bool = False
    log1p: tuple[str, ...] | None = None

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


_PARSERS = {
    "input": str,
    "format": str,
    "caps_file": str,
    "symbols": lambda s: tuple(x.strip() for x in s.split(",") if x.strip()),
    "start": _parse_date,
    "end": _parse_date,
    "gap_policy": str,
    "max_gap": int,
    "gap_on_exceed": str,
    "simple_returns": _parse_bool,
    "alpha": float,
    "window": int,
    "theta_bar": float,
    "fixed_thresholds": lambda s: _parse_thresholds(s),
    "euler_raw": _parse_bool,
    "normalize_caps": _parse_bool,
    "out": str,
    "graphml": _parse_bool,
    "graphml_date": str,
    "annual_table": _parse_bool,
    "dense_adjacency": _parse_bool,
    "covariates": str,
    "lags": lambda s: _parse_lags(s),
    "bandwidth": int,
    "raw_counts": _parse_bool,
    "log1p": lambda s: tuple(x.strip() for x in s.split(",") if x.strip()),
}


def _parse_thresholds(text: str) -> tuple[float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise InputError(f"fixed_thresholds needs 'pos,neg', got {text!r}")
    pos, neg = float(parts[0]), float(parts[1])
    return pos, neg


def _parse_lags(text: str) -> tuple[tuple[str, int], ...]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise InputError(f"lag spec entries need 'name=days', got {part!r}")
        name, days = part.split("=", 1)
        out.append((name.strip(), int(days)))
    return tuple(out)


def read_config_file(path) -> dict[str, str]:
    """Plain key=value lines; '#' starts a comment, blank lines ignored."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path} line {line_no}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def resolve_config(
    file_values: dict[str, str] | None = None,
    overrides: dict[str, object] | None = None,
    env: dict[str, str] | None = None,
) -> PipelineConfig:
    """Layer raw string settings and typed overrides over the defaults."""
    env = os.environ if env is None else env
    known = {f.name for f in fields(PipelineConfig)}
    merged: dict[str, object] = {}
    for source_name, source in (("config file", file_values or {}),):
        for key, value in source.items():
            if key not in known:
                raise InputError(f"{source_name}: unknown setting {key!r}")
            merged[key] = _PARSERS[key](value)
    for key in known:
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            merged[key] = _PARSERS[key](env[env_key])
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in known:
            raise InputError(f"unknown setting {key!r}")
        merged[key] = _PARSERS[key](value) if isinstance(value, str) else value
    return PipelineConfig(**merged)


# --------------------------------------------------------------------------
# manifests

_STAGE_PARAMS = {
    "panel": (
        "input", "format", "caps_file", "symbols", "start", "end",
        "gap_policy", "max_gap", "gap_on_exceed", "simple_returns",
    ),
    "coes": ("alpha", "window"),
    "network": ("theta_bar", "fixed_thresholds", "dense_adjacency"),
    "score": ("euler_raw", "normalize_caps", "annual_table"),
    "graphml": ("graphml_date",),
    "drivers": ("covariates", "lags", "bandwidth", "raw_counts", "log1p"),
}


def _jsonable(value):
    if isinstance(value, dt.date):
        return value.isoformat()
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


def stage_params(config: PipelineConfig, stage: str) -> dict:
    return {k: _jsonable(getattr(config, k)) for k in _STAGE_PARAMS[stage]}


def config_hash(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    out_dir: Path,
    stage: str,
    params: dict,
    inputs: dict[str, str],
    outputs: list[Path],
    upstream: dict[str, str],
) -> None:
    manifest = {
        "stage": stage,
        "params": params,
        "config_hash": config_hash(params),
        "inputs": inputs,
        "upstream_config": upstream,
        "outputs": {
            str(p.relative_to(out_dir / stage)): file_digest(p) for p in sorted(outputs)
        },
    }
    path = out_dir / stage / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def load_manifest(out_dir: Path, stage: str) -> dict:
    path = out_dir / stage / "manifest.json"
    if not path.exists():
        raise InputError(
            f"no completed '{stage}' stage under {out_dir} (missing {path}); run it first"
        )
    return json.loads(path.read_text())


def check_upstream(out_dir: Path, stage: str, force: bool = False) -> dict:
    """Verify a completed upstream stage's artifacts still match its manifest."""
    manifest = load_manifest(out_dir, stage)
    problems = []
    for rel, digest in manifest.get("outputs", {}).items():
        path = out_dir / stage / rel
        if not path.exists():
            problems.append(f"missing output {path}")
        elif file_digest(path) != digest:
            problems.append(f"output {path} changed since the stage ran")
    for rel, digest in manifest.get("inputs", {}).items():
        path = out_dir / rel
        if not path.exists():
            problems.append(f"missing upstream input {path}")
        elif file_digest(path) != digest:
            problems.append(f"input {path} changed after '{stage}' ran")
    if problems:
        message = (
            f"stale '{stage}' artifacts: " + "; ".join(problems) +
            f". Re-run the '{stage}' stage (or pass --force to use them anyway)."
        )
        if force:
            logger.warning("%s (forced)", message)
        else:
            raise StaleArtifactError(message)
    return manifest


class _StageGuard:
    """Marks a stage directory failed on error; clears markers on entry."""

    def __init__(self, out_dir: Path, stage: str):
        self.dir = out_dir / stage
        self.stage = stage

    def __enter__(self):
        self.dir.mkdir(parents=True, exist_ok=True)
        for name in ("manifest.json", "_FAILED"):
            stale = self.dir / name
            if stale.exists():
                stale.unlink()
        return self.dir

    def __exit__(self, exc_type, exc, tb):
        if exc is not None:
            (self.dir / "_FAILED").write_text(f"{self.stage} failed: {exc}\n")
            if isinstance(exc, TailnetError):
                raise type(exc)(f"stage {self.stage}: {exc}") from exc
            raise ComputationError(f"stage {self.stage}: {exc}") from exc
        return False


# --------------------------------------------------------------------------
# stages


def stage_ingest(config: PipelineConfig, force: bool = False) -> ReturnPanel:
    """Load raw prices, build the panel, write the canonical artifacts."""
    out_dir = config.out_dir
    if config.input is None:
        raise InputError("no input file configured (set input= or --input)")
    with _StageGuard(out_dir, "panel") as stage_dir:
        in_path = Path(config.input)
        records = load_records(in_path, config.format, caps_path=config.caps_file)
        policy = GapPolicy(config.gap_policy, config.max_gap, config.gap_on_exceed)
        panel = build_panel(
            records,
            symbols=config.symbols,
            date_range=(config.start, config.end),
            gap_policy=policy,
            simple_returns=config.simple_returns,
        )
        outputs = write_panel(panel, stage_dir)
        summary = stage_dir / "summary.txt"
        summary.write_text(_panel_summary(panel))
        outputs.append(summary)
        inputs = {str(in_path.resolve()): file_digest(in_path)}
        if config.format == "prices-wide":
            from tailnet.panel import default_caps_path

            caps_path = Path(config.caps_file) if config.caps_file else default_caps_path(in_path)
            inputs[str(caps_path.resolve())] = file_digest(caps_path)
        write_manifest(out_dir, "panel", stage_params(config, "panel"), inputs, outputs, {})
    return panel


def _panel_summary(panel: ReturnPanel) -> str:
    return (
        f"assets: {panel.n_assets}\n"
        f"dates: {panel.n_dates}\n"
        f"first: {panel.dates[0].isoformat()}\n"
        f"last: {panel.dates[-1].isoformat()}\n"
        f"symbols: {','.join(panel.symbols)}\n"
    )


def stage_simulate(config: PipelineConfig, spec: syn.FactorSpec,
                   spec_post: syn.FactorSpec | None = None,
                   switch_day: int | None = None,
                   emit_prices: bool = False) -> ReturnPanel:
    """Generate a synthetic panel and write it as the panel stage."""
    out_dir = config.out_dir
    with _StageGuard(out_dir, "panel") as stage_dir:
        if spec_post is not None:
            panel = syn.regime_panel(spec, spec_post, switch_day or 0)
        else:
            panel = syn.generate_panel(spec)
        outputs = write_panel(panel, stage_dir)
        summary = stage_dir / "summary.txt"
        summary.write_text(_panel_summary(panel))
        outputs.append(summary)
        if emit_prices:
            prices = stage_dir / "prices_long.csv"
            syn.write_price_csv(panel, prices)
            outputs.append(prices)
        params = {
            "preset_spec": {
                "n_assets": spec.n_assets,
                "betas": list(spec.betas),
                "idio_vol": list(spec.idio_vol),
                "factor_vol": spec.factor_vol,
                "cap_profile": list(spec.cap_profile),
                "seed": spec.seed,
                "horizon": spec.horizon,
                "student_df": spec.student_df,
                "symbols": list(spec.asset_names()),
            },
            "switch_day": switch_day,
            "two_regimes": spec_post is not None,
        }
        write_manifest(out_dir, "panel", params, {}, outputs, {})
    return panel


def stage_coes(
    config: PipelineConfig, panel: ReturnPanel | None = None, force: bool = False
) -> tuple[list[tail.CoESMatrix], list[str]]:
    """Rolling CoES tensor from the panel stage."""
    out_dir = config.out_dir
    upstream = check_upstream(out_dir, "panel", force)
    if panel is None:
        panel = read_panel(out_dir / "panel")
    with _StageGuard(out_dir, "coes") as stage_dir:
        matrices = tail.rolling_coes(panel, tail.TailConfig(config.alpha, config.window))
        coes_path = stage_dir / "coes.csv"
        tail.write_coes_long(matrices, panel.symbols, coes_path)
        inputs = {
            f"panel/{name}": file_digest(out_dir / "panel" / name)
            for name in ("returns.csv", "caps.csv")
        }
        write_manifest(
            out_dir, "coes", stage_params(config, "coes"), inputs, [coes_path],
            {"panel": upstream["config_hash"]},
        )
    return matrices, list(panel.symbols)


def stage_network(
    config: PipelineConfig,
    matrices: list[tail.CoESMatrix] | None = None,
    symbols: list[str] | None = None,
    force: bool = False,
) -> tuple[list[net.SignedAdjacency], list[net.BreakpointResult], np.ndarray]:
    """Per-date signed adjacency and breakpoint diagnostics."""
    out_dir = config.out_dir
    upstream = check_upstream(out_dir, "coes", force)
    if matrices is None or symbols is None:
        matrices, symbols = tail.read_coes_long(out_dir / "coes" / "coes.csv")
    with _StageGuard(out_dir, "network") as stage_dir:
        adjacencies: list[net.SignedAdjacency] = []
        breakpoints: list[net.BreakpointResult] = []
        ratios = np.empty(len(matrices))
        for t, matrix in enumerate(matrices):
            cs = net.correlation_set(matrix, symbols)
            if config.fixed_thresholds is not None:
                pos_thr, neg_thr = config.fixed_thresholds
                adj = net.build_adjacency_fixed(cs, pos_thr, neg_thr, matrix.date)
                bp = net.BreakpointResult(
                    theta_plus=None, theta_minus=None,
                    threshold_plus=pos_thr, threshold_minus=neg_thr,
                    n1=int(np.count_nonzero(cs.rho > 0)),
                    n2=int(np.count_nonzero(cs.rho < 0)),
                    n_zero=int(np.count_nonzero(cs.rho == 0)),
                )
            else:
                adj, bp = net.build_adjacency(cs, config.theta_bar, matrix.date)
            adjacencies.append(adj)
            breakpoints.append(bp)
            ratios[t] = rk.negative_ratio(cs)
        outputs = [
            _write_adjacency_long(stage_dir / "adjacency.csv", adjacencies, symbols),
            _write_breakpoints(stage_dir / "breakpoints.csv", adjacencies, breakpoints, ratios, config.theta_bar),
        ]
        if config.dense_adjacency:
            dense_dir = stage_dir / "dense"
            dense_dir.mkdir(exist_ok=True)
            for adj in adjacencies:
                outputs.append(_write_dense_adjacency(dense_dir, adj, symbols))
        inputs = {"coes/coes.csv": file_digest(out_dir / "coes" / "coes.csv")}
        write_manifest(
            out_dir, "network", stage_params(config, "network"), inputs, outputs,
            {"coes": upstream["config_hash"]},
        )
    return adjacencies, breakpoints, ratios


def _write_adjacency_long(path: Path, adjacencies, symbols) -> Path:
    """Nonzero upper-triangle entries: ``date,i,j,a``."""
    with open(path, "w") as fh:
        fh.write("date,i,j,a\n")
        for adj in adjacencies:
            day = adj.date.isoformat()
            iu, ju = np.nonzero(np.triu(adj.a, k=1))
            for i, j in zip(iu, ju):
                fh.write(f"{day},{symbols[i]},{symbols[j]},{int(adj.a[i, j])}\n")
    return path


def _write_breakpoints(path: Path, adjacencies, breakpoints, ratios, theta_bar) -> Path:
    def cell(v):
        return "" if v is None else format_float(v)

    with open(path, "w") as fh:
        fh.write(
            "date,theta_bar,theta_plus,threshold_plus,theta_minus,threshold_minus,"
            "n1,n2,n_zero,negative_ratio\n"
        )
        for adj, bp, ratio in zip(adjacencies, breakpoints, ratios):
            fh.write(
                f"{adj.date.isoformat()},{format_float(theta_bar)},"
                f"{cell(bp.theta_plus)},{cell(bp.threshold_plus)},"
                f"{cell(bp.theta_minus)},{cell(bp.threshold_minus)},"
                f"{bp.n1},{bp.n2},{bp.n_zero},{format_float(ratio)}\n"
            )
    return path


def _write_dense_adjacency(dense_dir: Path, adj: net.SignedAdjacency, symbols) -> Path:
    path = dense_dir / f"adjacency_{adj.date.isoformat()}.csv"
    lines = ["symbol," + ",".join(symbols)]
    for i, sym in enumerate(symbols):
        lines.append(sym + "," + ",".join(str(int(v)) for v in adj.a[i]))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_network_artifacts(out_dir: Path) -> tuple[list[net.SignedAdjacency], np.ndarray, list[str]]:
    """Rebuild adjacencies and negative ratios from the network stage."""
    import csv as _csv

    bp_path = out_dir / "network" / "breakpoints.csv"
    adj_path = out_dir / "network" / "adjacency.csv"
    dates: list[dt.date] = []
    ratios: list[float] = []
    with open(bp_path, newline="") as fh:
        reader = _csv.DictReader(fh)
        for row in reader:
            dates.append(dt.date.fromisoformat(row["date"]))
            ratios.append(float(row["negative_ratio"]))

    # symbol order comes from the panel stage to keep axes consistent
    panel = read_panel(out_dir / "panel")
    symbols = list(panel.symbols)
    index = {s: i for i, s in enumerate(symbols)}
    n = len(symbols)
    by_date: dict[dt.date, np.ndarray] = {d: np.zeros((n, n), dtype=np.int8) for d in dates}
    with open(adj_path, newline="") as fh:
        reader = _csv.DictReader(fh)
        for row in reader:
            day = dt.date.fromisoformat(row["date"])
            if day not in by_date:
                raise InputError(f"{adj_path}: date {day} missing from breakpoints.csv")
            i, j = index[row["i"]], index[row["j"]]
            by_date[day][i, j] = by_date[day][j, i] = int(row["a"])
    adjacencies = []
    for d in dates:
        a = by_date[d]
        a.flags.writeable = False
        adjacencies.append(net.SignedAdjacency(date=d, a=a))
    return adjacencies, np.array(ratios), symbols


def stage_score(
    config: PipelineConfig,
    panel: ReturnPanel | None = None,
    adjacencies: list[net.SignedAdjacency] | None = None,
    ratios: np.ndarray | None = None,
    force: bool = False,
) -> rk.RiskSeries:
    """Systemic score, contributions, and optional annual table."""
    out_dir = config.out_dir
    up_net = check_upstream(out_dir, "network", force)
    up_panel = check_upstream(out_dir, "panel", force)
    if adjacencies is None or ratios is None:
        adjacencies, ratios, _ = read_network_artifacts(out_dir)
    if panel is None:
        panel = read_panel(out_dir / "panel")
    with _StageGuard(out_dir, "score") as stage_dir:
        series = rk.risk_series(
            adjacencies,
            panel,
            negative_ratios=ratios,
            euler_raw=config.euler_raw,
            normalize_caps=config.normalize_caps,
        )
        scores_path = stage_dir / "scores.csv"
        contrib_path = stage_dir / "contributions.csv"
        rk.write_scores(series, scores_path)
        rk.write_contributions(series, contrib_path)
        outputs = [scores_path, contrib_path]
        if config.annual_table:
            annual_path = stage_dir / "annual.csv"
            rk.write_annual_table(series, annual_path)
            outputs.append(annual_path)
        inputs = {
            "network/adjacency.csv": file_digest(out_dir / "network" / "adjacency.csv"),
            "network/breakpoints.csv": file_digest(out_dir / "network" / "breakpoints.csv"),
            "panel/caps.csv": file_digest(out_dir / "panel" / "caps.csv"),
        }
        write_manifest(
            out_dir, "score", stage_params(config, "score"), inputs, outputs,
            {"network": up_net["config_hash"], "panel": up_panel["config_hash"]},
        )
    return series


def read_contributions(out_dir: Path) -> dict[dt.date, dict[str, float]]:
    import csv as _csv

    path = out_dir / "score" / "contributions.csv"
    table: dict[dt.date, dict[str, float]] = {}
    with open(path, newline="") as fh:
        for row in _csv.DictReader(fh):
            day = dt.date.fromisoformat(row["date"])
            table.setdefault(day, {})[row["symbol"]] = float(row["contribution"])
    return table


def stage_graphml(config: PipelineConfig, force: bool = False) -> list[Path]:
    """Export networks for one date (or all) as GraphML files."""
    out_dir = config.out_dir
    check_upstream(out_dir, "network", force)
    check_upstream(out_dir, "panel", force)
    adjacencies, _, symbols = read_network_artifacts(out_dir)
    panel = read_panel(out_dir / "panel")
    contributions = None
    if (out_dir / "score" / "manifest.json").exists():
        check_upstream(out_dir, "score", force)
        contributions = read_contributions(out_dir)

    if config.graphml_date is not None and config.graphml_date != "all":
        wanted = _parse_date(config.graphml_date)
        available = [a.date for a in adjacencies]
        if wanted not in set(available):
            listing = ", ".join(d.isoformat() for d in available[:20])
            more = "" if len(available) <= 20 else f", ... and {len(available) - 20} more"
            raise InputError(
                f"no network for {wanted.isoformat()}; available dates: {listing}{more}"
            )
        adjacencies = [a for a in adjacencies if a.date == wanted]

    pos = {d: t for t, d in enumerate(panel.dates)}
    with _StageGuard(out_dir, "graphml") as stage_dir:
        outputs = []
        for adj in adjacencies:
            caps = panel.caps[pos[adj.date]]
            contrib = None
            if contributions is not None:
                per_symbol = contributions[adj.date]
                contrib = [per_symbol[s] for s in symbols]
            path = stage_dir / f"net_{adj.date.isoformat()}.graphml"
            net.export_graphml(adj, symbols, caps, path, contributions=contrib)
            outputs.append(path)
        inputs = {
            "network/adjacency.csv": file_digest(out_dir / "network" / "adjacency.csv"),
            "panel/caps.csv": file_digest(out_dir / "panel" / "caps.csv"),
        }
        write_manifest(out_dir, "graphml", stage_params(config, "graphml"), inputs, outputs, {})
    return outputs


def stage_drivers(config: PipelineConfig, force: bool = False) -> drv.RegressionResult:
    """Regress the risk score on user covariates with HAC errors."""
    out_dir = config.out_dir
    up_score = check_upstream(out_dir, "score", force)
    if config.covariates is None:
        raise InputError("no covariate file configured (set covariates= or --covariates)")
    with _StageGuard(out_dir, "drivers") as stage_dir:
        table = drv.load_covariates(config.covariates)
        if not config.raw_counts:
            case_like = tuple(
                n for n in table.names
                if "cases" in n.lower() or (config.log1p and n in config.log1p)
            )
            if case_like:
                table = drv.log1p_transform(table, case_like)
        series = _series_from_scores(out_dir)
        design = drv.align_covariates(series, table, dict(config.lags))
        result = drv.ols_hac(design.y, design.X, bandwidth=config.bandwidth, names=design.names)
        csv_path = stage_dir / "regression.csv"
        txt_path = stage_dir / "regression.txt"
        drv.write_regression_csv(result, csv_path)
        drv.write_regression_report(result, txt_path)
        inputs = {
            "score/scores.csv": file_digest(out_dir / "score" / "scores.csv"),
            str(Path(config.covariates).resolve()): file_digest(Path(config.covariates)),
        }
        write_manifest(
            out_dir, "drivers", stage_params(config, "drivers"), inputs,
            [csv_path, txt_path], {"score": up_score["config_hash"]},
        )
    return result


def _series_from_scores(out_dir: Path) -> rk.RiskSeries:
    """Minimal RiskSeries (dates + score) reloaded from the score stage."""
    import csv as _csv

    path = out_dir / "score" / "scores.csv"
    dates, scores, ratios = [], [], []
    with open(path, newline="") as fh:
        for row in _csv.DictReader(fh):
            dates.append(dt.date.fromisoformat(row["date"]))
            scores.append(float(row["score"]))
            ratios.append(float(row["negative_ratio"]))
    return rk.RiskSeries(
        dates=tuple(dates),
        symbols=(),
        score=np.array(scores),
        contributions=np.zeros((len(dates), 0)),
        negative_ratio=np.array(ratios),
    )


def run_pipeline(config: PipelineConfig, force: bool = False) -> int:
    """Full run: ingest -> coes -> network -> score (+ optional extras)."""
    panel = stage_ingest(config, force)
    matrices, symbols = stage_coes(config, panel, force)
    adjacencies, _, ratios = stage_network(config, matrices, symbols, force)
    stage_score(config, panel, adjacencies, ratios, force)
    if config.graphml:
        stage_graphml(config, force)
    if config.covariates is not None:
        stage_drivers(config, force)
    return 0
