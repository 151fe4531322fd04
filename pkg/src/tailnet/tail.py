"""Rolling historical VaR, ES, and pairwise CoES matrices.

Estimators are plain historical simulation on a rolling window of W
daily returns. The VaR at tail level alpha is the k-th smallest window
return with k = ceil(alpha * W); the tail set conditions on returns at
or below that value, so it always has at least k members even under
ties. Entry (i, j) of a CoES matrix is the mean return of asset i over
the dates on which asset j sits in its own tail; the diagonal is the
asset's expected shortfall.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from tailnet._kernels import rolling_coes_kernel
from tailnet.errors import InputError
from tailnet.panel import ReturnPanel, format_float

# Slack for deciding that alpha * W "is" an integer despite float noise.
_INT_EPS = 1e-9


def var_rank(alpha: float, window: int) -> int:
    """Order-statistic rank k = ceil(alpha * window), noise-robust.

    Products that land within rounding error of an integer are treated
    as that integer (0.1 * 20 must give k = 2, not 3).
    """
    _validate_alpha(alpha)
    if window < 2:
        raise InputError(f"window must be >= 2, got {window}")
    product = alpha * window
    if product < 1.0 - _INT_EPS:
        raise InputError(
            f"degenerate tail: floor(alpha*window) < 1 for alpha={alpha}, window={window}"
        )
    nearest = round(product)
    if abs(product - nearest) <= _INT_EPS * max(1.0, nearest):
        return int(nearest)
    return math.ceil(product)


def _validate_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 0.5):
        raise InputError(f"alpha must lie in (0, 0.5], got {alpha}")


@dataclass(frozen=True)
class TailConfig:
    """Tail probability and rolling window length."""

    alpha: float = 0.05
    window: int = 250

    def __post_init__(self):
        var_rank(self.alpha, self.window)

    @property
    def rank(self) -> int:
        return var_rank(self.alpha, self.window)


def historical_var(window_returns, alpha: float) -> float:
    """k-th smallest return of the window, k = ceil(alpha * W)."""
    x = np.asarray(window_returns, dtype=np.float64)
    if x.ndim != 1:
        raise InputError("window_returns must be one-dimensional")
    k = var_rank(alpha, x.size)
    return float(np.partition(x, k - 1)[k - 1])


def tail_set(window_j, var_j: float) -> np.ndarray:
    """Indices of window dates with return at or below ``var_j``.

    Non-empty by construction when ``var_j`` is the order-statistic VaR
    of the same window.
    """
    x = np.asarray(window_j, dtype=np.float64)
    return np.flatnonzero(x <= var_j)


def coes_pair(window_i, window_j, alpha: float) -> float:
    """Mean of asset i's returns over asset j's tail dates."""
    xi = np.asarray(window_i, dtype=np.float64)
    xj = np.asarray(window_j, dtype=np.float64)
    if xi.shape != xj.shape:
        raise InputError("paired windows must have equal length")
    idx = tail_set(xj, historical_var(xj, alpha))
    return float(xi[idx].mean())


def expected_shortfall(window, alpha: float) -> float:
    """Self-conditioned CoES: mean return over the asset's own tail."""
    return coes_pair(window, window, alpha)


@dataclass(frozen=True)
class CoESMatrix:
    """Pairwise CoES at one date. Row i is asset i's risk-structure vector."""

    date: dt.date
    values: np.ndarray
    var_vector: np.ndarray

    @property
    def n_assets(self) -> int:
        return self.values.shape[0]


def rolling_coes(panel: ReturnPanel, config: TailConfig) -> list[CoESMatrix]:
    """One CoES matrix per date from window-end W through T.

    Output length is T - W + 1 and dates match the panel tail.
    """
    W = config.window
    T = panel.n_dates
    if T < W:
        raise InputError(
            f"panel has {T} dates but the rolling window needs at least {W}"
        )
    coes, var = rolling_coes_kernel(panel.returns, W, config.rank)
    coes.flags.writeable = False
    var.flags.writeable = False
    dates = panel.dates[W - 1 :]
    return [CoESMatrix(d, coes[w], var[w]) for w, d in enumerate(dates)]


def write_coes_long(matrices: list[CoESMatrix], symbols, path) -> None:
    """Long-format export: ``date,i,j,coes,var_j`` with one row per cell."""
    symbols = list(symbols)
    n = len(symbols)
    pair_prefix = [f"{symbols[i]},{symbols[j]}" for i in range(n) for j in range(n)]
    with open(path, "w") as fh:
        fh.write("date,i,j,coes,var_j\n")
        for m in matrices:
            day = m.date.isoformat()
            flat = m.values.ravel()
            var = m.var_vector
            rows = [
                f"{day},{pair_prefix[p]},{format_float(flat[p])},{format_float(var[p % n])}"
                for p in range(n * n)
            ]
            fh.write("\n".join(rows))
            fh.write("\n")


def read_coes_long(path) -> tuple[list[CoESMatrix], list[str]]:
    """Reload matrices written by :func:`write_coes_long`."""
    import csv

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["date", "i", "j", "coes", "var_j"]:
            raise InputError(f"{path}: not a long-format CoES file")
        by_date: dict[str, list[tuple[str, str, float, float]]] = {}
        order: list[str] = []
        for row in reader:
            if not row:
                continue
            if len(row) != 5:
                raise InputError(f"{path}: ragged row {row!r}")
            day = row[0]
            if day not in by_date:
                by_date[day] = []
                order.append(day)
            by_date[day].append((row[1], row[2], float(row[3]), float(row[4])))

    if not order:
        raise InputError(f"{path}: no data rows")
    first = by_date[order[0]]
    symbols: list[str] = []
    for si, _sj, _c, _v in first:
        if si not in symbols:
            symbols.append(si)
    index = {s: i for i, s in enumerate(symbols)}
    n = len(symbols)
    matrices = []
    for day in order:
        rows = by_date[day]
        if len(rows) != n * n:
            raise InputError(f"{path}: date {day} has {len(rows)} cells, expected {n * n}")
        values = np.empty((n, n), dtype=np.float64)
        var = np.empty(n, dtype=np.float64)
        for si, sj, c, v in rows:
            values[index[si], index[sj]] = c
            var[index[sj]] = v
        values.flags.writeable = False
        var.flags.writeable = False
        matrices.append(CoESMatrix(dt.date.fromisoformat(day), values, var))
    return matrices, symbols
