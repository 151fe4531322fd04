"""Market-cap-weighted systemic risk score and its per-asset split.

The score at a date is the quadratic form c' A c over the signed
adjacency (zero diagonal, so no self terms). It decomposes additively
into per-asset contributions c_i * (A c)_i, which sum back to the score;
an optional raw Euler mode doubles each contribution (the literal
gradient of a symmetric quadratic form), trading additivity for the
textbook marginal reading.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from tailnet.errors import InputError
from tailnet.network import CorrelationSet, SignedAdjacency
from tailnet.panel import ReturnPanel, format_float


def _checked(a: SignedAdjacency, caps) -> tuple[np.ndarray, np.ndarray]:
    mat = np.asarray(a.a, dtype=np.float64)
    c = np.asarray(caps, dtype=np.float64)
    if c.ndim != 1 or c.size != mat.shape[0]:
        raise InputError(
            f"cap vector has {c.size} entries but adjacency is {mat.shape[0]}x{mat.shape[0]}"
        )
    if np.any(c <= 0):
        raise InputError("market caps must be strictly positive")
    return mat, c


def systemic_score(a: SignedAdjacency, caps) -> float:
    """c' A c, summing cap products over all signed pairs."""
    mat, c = _checked(a, caps)
    return float(c @ mat @ c)


def decompose_score(a: SignedAdjacency, caps, euler_raw: bool = False) -> np.ndarray:
    """Per-asset contributions c_i * (A c)_i; doubled when ``euler_raw``."""
    mat, c = _checked(a, caps)
    contrib = c * (mat @ c)
    return 2.0 * contrib if euler_raw else contrib


def negative_ratio(cs: CorrelationSet) -> float:
    """Fraction of pairs with strictly negative similarity."""
    n = cs.n_pairs
    if n < 1:
        raise InputError("correlation set is empty")
    return int(np.count_nonzero(cs.rho < 0.0)) / n


@dataclass(frozen=True)
class RiskSeries:
    """Dated systemic score, per-asset contributions, and negative ratio."""

    dates: tuple[dt.date, ...]
    symbols: tuple[str, ...]
    score: np.ndarray
    contributions: np.ndarray
    negative_ratio: np.ndarray

    @property
    def n_dates(self) -> int:
        return len(self.dates)


def risk_series(
    adjacencies: list[SignedAdjacency],
    panel: ReturnPanel,
    correlation_sets: list[CorrelationSet] | None = None,
    negative_ratios=None,
    euler_raw: bool = False,
    normalize_caps: bool = False,
) -> RiskSeries:
    """Assemble the per-date score/contribution/ratio series.

    Caps are taken at each evaluation date (optionally normalized to
    weights summing to 1). Pass either the per-date correlation sets or
    precomputed negative ratios, aligned with ``adjacencies``.
    """
    if correlation_sets is not None:
        if len(correlation_sets) != len(adjacencies):
            raise InputError("correlation sets and adjacencies differ in length")
        ratios = np.array([negative_ratio(cs) for cs in correlation_sets])
    elif negative_ratios is not None:
        ratios = np.asarray(negative_ratios, dtype=np.float64)
        if ratios.size != len(adjacencies):
            raise InputError("negative_ratios and adjacencies differ in length")
    else:
        raise InputError("need correlation_sets or negative_ratios")

    pos = {d: t for t, d in enumerate(panel.dates)}
    n = panel.n_assets
    T = len(adjacencies)
    score = np.empty(T, dtype=np.float64)
    contributions = np.empty((T, n), dtype=np.float64)
    dates = []
    for t, adj in enumerate(adjacencies):
        if adj.date not in pos:
            raise InputError(f"adjacency date {adj.date} not present in the panel")
        if adj.n_assets != n:
            raise InputError(f"adjacency at {adj.date} has wrong dimension")
        caps = panel.caps[pos[adj.date]]
        if normalize_caps:
            caps = caps / caps.sum()
        contributions[t] = decompose_score(adj, caps, euler_raw=euler_raw)
        score[t] = systemic_score(adj, caps)
        dates.append(adj.date)
    score.flags.writeable = False
    contributions.flags.writeable = False
    ratios.flags.writeable = False
    return RiskSeries(
        dates=tuple(dates),
        symbols=panel.symbols,
        score=score,
        contributions=contributions,
        negative_ratio=ratios,
    )


def annual_table(series: RiskSeries) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Mean daily contribution per asset and calendar year.

    Returns (years, table, score_row): ``table[k, y]`` is the mean
    contribution of asset k over year y and ``score_row[y]`` the mean
    systemic score (= column sum of the table).
    """
    years = sorted({d.year for d in series.dates})
    year_index = {y: k for k, y in enumerate(years)}
    n = len(series.symbols)
    sums = np.zeros((n, len(years)))
    score_sums = np.zeros(len(years))
    counts = np.zeros(len(years))
    for t, d in enumerate(series.dates):
        k = year_index[d.year]
        sums[:, k] += series.contributions[t]
        score_sums[k] += series.score[t]
        counts[k] += 1
    return years, sums / counts, score_sums / counts


def write_scores(series: RiskSeries, path) -> None:
    """Score series export: ``date,score,negative_ratio``."""
    lines = ["date,score,negative_ratio"]
    for t, d in enumerate(series.dates):
        lines.append(
            f"{d.isoformat()},{format_float(series.score[t])},"
            f"{format_float(series.negative_ratio[t])}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_contributions(series: RiskSeries, path) -> None:
    """Contribution export: ``date,symbol,contribution``."""
    with open(path, "w") as fh:
        fh.write("date,symbol,contribution\n")
        for t, d in enumerate(series.dates):
            day = d.isoformat()
            fh.write(
                "\n".join(
                    f"{day},{sym},{format_float(series.contributions[t, k])}"
                    for k, sym in enumerate(series.symbols)
                )
            )
            fh.write("\n")


def write_annual_table(series: RiskSeries, path) -> None:
    """Symbol-by-year table of mean contributions, plus summary rows."""
    years, table, score_row = annual_table(series)
    lines = ["symbol," + ",".join(str(y) for y in years)]
    for k, sym in enumerate(series.symbols):
        lines.append(sym + "," + ",".join(format_float(v) for v in table[k]))
    lines.append(
        "systemic_risk_score," + ",".join(format_float(v) for v in score_row)
    )
    lines.append(
        "average_risk_score,"
        + ",".join(format_float(v / len(series.symbols)) for v in score_row)
    )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
