"""Regress the systemic risk series on exogenous covariates.

Plain OLS with Newey-West (Bartlett kernel) standard errors; the
default lag truncation is floor(4 * (T/100)^(2/9)). Covariates come
from a ``date,<name1>,<name2>,...`` file, are optionally lagged per
column, and join the risk series on dates with an intercept prepended.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import linalg as sla
from scipy import stats

from tailnet.errors import InputError
from tailnet.panel import format_float
from tailnet.risk import RiskSeries


@dataclass(frozen=True)
class CovariateTable:
    dates: tuple[dt.date, ...]
    names: tuple[str, ...]
    values: np.ndarray


def load_covariates(path) -> CovariateTable:
    """Read a covariate file with header ``date,<name1>,...``."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"covariate file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "date" or len(header) < 2:
            raise InputError(f"{path}: expected header 'date,<name>,...'")
        names = tuple(h.strip() for h in header[1:])
        dates, rows = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputError(f"{path} line {line_no}: ragged row")
            try:
                dates.append(dt.date.fromisoformat(row[0].strip()))
                rows.append([float(v) for v in row[1:]])
            except ValueError:
                raise InputError(f"{path} line {line_no}: malformed value") from None
    if len(set(dates)) != len(dates):
        raise InputError(f"{path}: duplicate dates")
    order = np.argsort(np.array(dates, dtype="datetime64[D]"), kind="stable")
    values = np.array(rows, dtype=np.float64)[order]
    if not np.all(np.isfinite(values)):
        raise InputError(f"{path}: non-finite covariate values")
    return CovariateTable(
        dates=tuple(dates[i] for i in order), names=names, values=values
    )


def log1p_transform(table: CovariateTable, names) -> CovariateTable:
    """Replace the named columns with log(1 + value)."""
    wanted = set(names)
    unknown = wanted - set(table.names)
    if unknown:
        raise InputError(f"unknown covariates for log1p: {sorted(unknown)}")
    values = table.values.copy()
    for k, name in enumerate(table.names):
        if name in wanted:
            if np.any(values[:, k] < 0):
                raise InputError(f"covariate {name} has negative values; log1p undefined")
            values[:, k] = np.log1p(values[:, k])
    return CovariateTable(dates=table.dates, names=table.names, values=values)


@dataclass(frozen=True)
class AlignedDesign:
    """Inner-joined regression inputs: y, design matrix, column names."""

    dates: tuple[dt.date, ...]
    y: np.ndarray
    X: np.ndarray
    names: tuple[str, ...]


def align_covariates(
    series: RiskSeries, table: CovariateTable, lag_spec: dict[str, int] | None = None
) -> AlignedDesign:
    """Join risk series and covariates on dates, shifting lagged columns.

    A covariate with lag L contributes its value from L positions back
    in its own calendar, so its first L dates drop out of the join. An
    intercept column is prepended.
    """
    lags = dict(lag_spec or {})
    unknown = set(lags) - set(table.names)
    if unknown:
        raise InputError(f"lag_spec names not in covariate table: {sorted(unknown)}")
    for name, lag in lags.items():
        if lag < 0:
            raise InputError(f"negative lag for {name}")

    shifted: list[dict[dt.date, float]] = []
    for k, name in enumerate(table.names):
        lag = lags.get(name, 0)
        col = table.values[:, k]
        if lag >= len(table.dates):
            raise InputError(f"lag {lag} for {name} exceeds covariate history")
        end = len(table.dates)
        shifted.append(
            {table.dates[t]: col[t - lag] for t in range(lag, end)}
        )

    rows, y_rows, dates = [], [], []
    for t, day in enumerate(series.dates):
        vals = [m.get(day) for m in shifted]
        if any(v is None for v in vals):
            continue
        rows.append([1.0] + vals)
        y_rows.append(series.score[t])
        dates.append(day)
    if not rows:
        raise InputError("no overlapping dates between risk series and covariates")
    return AlignedDesign(
        dates=tuple(dates),
        y=np.array(y_rows, dtype=np.float64),
        X=np.array(rows, dtype=np.float64),
        names=("intercept",) + table.names,
    )


def default_bandwidth(T: int) -> int:
    return int(math.floor(4.0 * (T / 100.0) ** (2.0 / 9.0)))


@dataclass(frozen=True)
class RegressionResult:
    names: tuple[str, ...]
    coef: np.ndarray
    se: np.ndarray
    tstat: np.ndarray
    pvalue: np.ndarray
    r_squared: float
    bandwidth: int
    n_obs: int


def _collinear_names(X: np.ndarray, names) -> list[str]:
    _, R, piv = sla.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diagonal(R))
    tol = max(X.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    return [str(names[piv[i]]) for i in range(len(diag)) if diag[i] <= tol]


def ols_hac(y, X, bandwidth: int | None = None, names=None) -> RegressionResult:
    """OLS coefficients with Newey-West standard errors.

    Bartlett weights 1 - l/(L+1) up to lag L; L = 0 reproduces White
    heteroskedasticity-robust errors exactly. Coefficients come from an
    orthogonal-decomposition least-squares solve.
    """
    y = np.asarray(y, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or y.size != X.shape[0]:
        raise InputError("design matrix and response are misaligned")
    T, k = X.shape
    if T <= k:
        raise InputError(f"need more observations ({T}) than regressors ({k})")
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(k))
    if len(names) != k:
        raise InputError("names do not match design width")
    if np.linalg.matrix_rank(X) < k:
        raise InputError(f"design is rank deficient; collinear columns: {_collinear_names(X, names)}")
    L = default_bandwidth(T) if bandwidth is None else int(bandwidth)
    if L < 0 or L >= T:
        raise InputError(f"bandwidth must lie in [0, {T - 1}]")

    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    xu = X * resid[:, None]
    meat = xu.T @ xu
    for lag in range(1, L + 1):
        w = 1.0 - lag / (L + 1.0)
        gamma = xu[lag:].T @ xu[:-lag]
        meat += w * (gamma + gamma.T)
    bread = np.linalg.inv(X.T @ X)
    cov = bread @ meat @ bread
    se = np.sqrt(np.diagonal(cov))
    tstat = coef / se
    pvalue = 2.0 * stats.norm.sf(np.abs(tstat))
    sst = float(np.sum((y - y.mean()) ** 2))
    ssr = float(resid @ resid)
    r_squared = 1.0 - ssr / sst if sst > 0 else 0.0
    return RegressionResult(
        names=names,
        coef=coef,
        se=se,
        tstat=tstat,
        pvalue=pvalue,
        r_squared=r_squared,
        bandwidth=L,
        n_obs=T,
    )


def write_regression_csv(result: RegressionResult, path) -> None:
    lines = ["name,coef,se,t,p"]
    for j, name in enumerate(result.names):
        lines.append(
            f"{name},{format_float(result.coef[j])},{format_float(result.se[j])},"
            f"{format_float(result.tstat[j])},{format_float(result.pvalue[j])}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_regression_report(result: RegressionResult, path) -> None:
    width = max(len(n) for n in result.names)
    lines = [
        f"observations: {result.n_obs}",
        f"hac bandwidth: {result.bandwidth}",
        f"r_squared: {result.r_squared:.6f}",
        "",
        f"{'name':<{width}}  {'coef':>14}  {'se':>14}  {'t':>9}  {'p':>9}",
    ]
    for j, name in enumerate(result.names):
        lines.append(
            f"{name:<{width}}  {result.coef[j]:>14.6g}  {result.se[j]:>14.6g}"
            f"  {result.tstat[j]:>9.3f}  {result.pvalue[j]:>9.4f}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
