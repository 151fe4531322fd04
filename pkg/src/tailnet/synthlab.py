"""Synthetic multi-asset markets with a planted one-factor structure.

Returns follow r[t, i] = beta_i * f_t + eps[t, i] with independent
Gaussian (optionally Student-t) innovations, so population correlations
are known in closed form and pipeline behaviour can be checked against
them. Prices rebuild from base 100 by cumulating log returns; caps stay
constant within a regime.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace

import numpy as np

from tailnet.errors import InputError
from tailnet.panel import AssetRecord, ReturnPanel

DEFAULT_START = dt.date(2019, 1, 1)


@dataclass(frozen=True)
class FactorSpec:
    """Parameters of one synthetic market regime."""

    n_assets: int
    betas: tuple[float, ...]
    idio_vol: tuple[float, ...]
    factor_vol: float
    cap_profile: tuple[float, ...]
    seed: int
    horizon: int
    student_df: float | None = None
    symbols: tuple[str, ...] | None = None
    start: dt.date = DEFAULT_START

    def __post_init__(self):
        if self.n_assets < 1:
            raise InputError("need at least one asset")
        for name, vals in (("betas", self.betas), ("idio_vol", self.idio_vol),
                           ("cap_profile", self.cap_profile)):
            if len(vals) != self.n_assets:
                raise InputError(f"{name} must have length {self.n_assets}")
        if any(v <= 0 for v in self.idio_vol) or self.factor_vol <= 0:
            raise InputError("volatilities must be positive")
        if any(c <= 0 for c in self.cap_profile):
            raise InputError("caps must be positive")
        if self.horizon < 2:
            raise InputError("horizon must be >= 2")
        if self.student_df is not None and self.student_df <= 2:
            raise InputError("student_df must exceed 2 for finite variance")
        if self.symbols is not None and len(self.symbols) != self.n_assets:
            raise InputError("symbols must match n_assets")

    def asset_names(self) -> tuple[str, ...]:
        if self.symbols is not None:
            return self.symbols
        width = max(2, len(str(self.n_assets)))
        return tuple(f"A{k:0{width}d}" for k in range(1, self.n_assets + 1))


def _innovations(rng: np.random.Generator, shape, df: float | None) -> np.ndarray:
    if df is None:
        return rng.standard_normal(shape)
    # scaled to unit variance so stated vols keep their meaning
    return rng.standard_t(df, shape) * np.sqrt((df - 2.0) / df)


def generate_panel(spec: FactorSpec) -> ReturnPanel:
    """Draw one regime: r = beta * f + eps, deterministic in the seed."""
    rng = np.random.default_rng(spec.seed)
    T, n = spec.horizon, spec.n_assets
    factor = _innovations(rng, T, spec.student_df) * spec.factor_vol
    eps = _innovations(rng, (T, n), spec.student_df) * np.asarray(spec.idio_vol)
    returns = factor[:, None] * np.asarray(spec.betas) + eps
    caps = np.tile(np.asarray(spec.cap_profile, dtype=np.float64), (T, 1))
    dates = [spec.start + dt.timedelta(days=k + 1) for k in range(T)]
    return ReturnPanel(dates, spec.asset_names(), returns, caps)


def regime_panel(
    spec_pre: FactorSpec, spec_post: FactorSpec, switch_day: int
) -> ReturnPanel:
    """Concatenate two regimes, switching processes at ``switch_day``.

    Day indices below the switch come from the pre regime, the rest from
    the post regime drawn on its own seed; switch 0 therefore reproduces
    the post panel exactly.
    """
    for attr in ("n_assets", "horizon", "start"):
        if getattr(spec_pre, attr) != getattr(spec_post, attr):
            raise InputError(f"regime specs differ in {attr}")
    if spec_pre.asset_names() != spec_post.asset_names():
        raise InputError("regime specs differ in asset names")
    if not (0 <= switch_day <= spec_pre.horizon):
        raise InputError(
            f"switch_day must lie in [0, {spec_pre.horizon}], got {switch_day}"
        )
    pre = generate_panel(spec_pre)
    post = generate_panel(spec_post)
    returns = np.vstack([pre.returns[:switch_day], post.returns[switch_day:]])
    caps = np.vstack([pre.caps[:switch_day], post.caps[switch_day:]])
    return ReturnPanel(pre.dates, pre.symbols, returns, caps)


def population_correlation(spec: FactorSpec) -> np.ndarray:
    """Analytic return correlation implied by the factor structure."""
    betas = np.asarray(spec.betas)
    idio = np.asarray(spec.idio_vol)
    total_var = betas**2 * spec.factor_vol**2 + idio**2
    cov = np.outer(betas, betas) * spec.factor_vol**2
    np.fill_diagonal(cov, total_var)
    sd = np.sqrt(total_var)
    return cov / np.outer(sd, sd)


def to_price_records(panel: ReturnPanel, base_price: float = 100.0) -> list[AssetRecord]:
    """Rebuild price observations from base 100, one day before the panel.

    Feeding these records back through ingestion reproduces the panel's
    returns up to log/exp round-off.
    """
    base_date = panel.dates[0] - dt.timedelta(days=1)
    records = []
    closes = base_price * np.exp(np.cumsum(panel.returns, axis=0))
    for j, sym in enumerate(panel.symbols):
        records.append(AssetRecord(sym, base_date, base_price, panel.caps[0, j]))
        for t, day in enumerate(panel.dates):
            records.append(AssetRecord(sym, day, float(closes[t, j]), float(panel.caps[t, j])))
    return records


def write_price_csv(panel: ReturnPanel, path, base_price: float = 100.0) -> None:
    """Emit the panel as a prices-long input file."""
    from tailnet.panel import format_float

    records = to_price_records(panel, base_price)
    records.sort(key=lambda r: (r.date, r.symbol))
    with open(path, "w") as fh:
        fh.write("date,symbol,close,market_cap\n")
        for r in records:
            fh.write(
                f"{r.date.isoformat()},{r.symbol},{format_float(r.close)},"
                f"{format_float(r.market_cap)}\n"
            )


def preset_spec(
    name: str,
    n_assets: int = 25,
    horizon: int = 1460,
    seed: int = 7,
    neg_count: int | None = None,
    factor_vol: float = 0.04,
    idio_vol: float = 0.02,
    student_df: float | None = None,
) -> FactorSpec:
    """Named market presets used by the simulate stage.

    "baseline": every asset loads +1 on the factor.
    "tether-like": one stablecoin-style asset loads -1, the rest +1.
    "mixed": ``neg_count`` assets load -1 (default 4).
    """
    if name == "baseline":
        negatives = 0
    elif name == "tether-like":
        negatives = 1
    elif name == "mixed":
        negatives = 4 if neg_count is None else neg_count
    else:
        raise InputError(f"unknown preset: {name!r}")
    if neg_count is not None:
        negatives = neg_count
    if not (0 <= negatives <= n_assets):
        raise InputError(f"neg_count must lie in [0, {n_assets}]")

    betas = [1.0] * (n_assets - negatives) + [-1.0] * negatives
    caps = list(np.geomspace(5e10, 2e8, n_assets))
    width = max(2, len(str(n_assets)))
    names = [f"A{k:0{width}d}" for k in range(1, n_assets - negatives + 1)]
    names += [f"STB{k:02d}" for k in range(1, negatives + 1)]
    return FactorSpec(
        n_assets=n_assets,
        betas=tuple(betas),
        idio_vol=(idio_vol,) * n_assets,
        factor_vol=factor_vol,
        cap_profile=tuple(caps),
        seed=seed,
        horizon=horizon,
        student_df=student_df,
        symbols=tuple(names),
    )


def with_seed(spec: FactorSpec, seed: int) -> FactorSpec:
    return replace(spec, seed=seed)
