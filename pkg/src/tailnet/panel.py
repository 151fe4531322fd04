"""Price/market-cap ingestion and immutable daily return panels.

Input formats
-------------
``prices-long``
    One observation per row, header ``date,symbol,close,market_cap``,
    ISO-8601 dates, dot decimal separator.
``prices-wide``
    Closes with header ``date,<sym1>,<sym2>,...`` plus a sibling file of
    market caps with the same layout (``<stem>_caps<ext>`` by default).

The canonical on-disk panel is one matrix file per field (``returns``,
``caps``): first column ``date``, one column per symbol, floats written
with 17 significant digits so reloading is bit-exact.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tailnet.errors import InputError

logger = logging.getLogger(__name__)

LONG_HEADER = ["date", "symbol", "close", "market_cap"]
ONE_DAY = dt.timedelta(days=1)


def format_float(x: float) -> str:
    """17-significant-digit decimal form; round-trips any double."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class AssetRecord:
    """One raw observation: closing price and market cap for a day."""

    symbol: str
    date: dt.date
    close: float
    market_cap: float


@dataclass(frozen=True)
class GapPolicy:
    """How to treat missing calendar days inside an asset's history.

    mode "forward-fill": fill runs of up to ``max_gap`` missing days with
    the last observation; longer runs drop the asset (``on_exceed`` =
    "drop", with a warning) or abort ("error").
    mode "drop-asset": any missing day drops the asset.
    """

    mode: str = "forward-fill"
    max_gap: int = 3
    on_exceed: str = "drop"

    def __post_init__(self):
        if self.mode not in ("forward-fill", "drop-asset"):
            raise InputError(f"unknown gap policy mode: {self.mode!r}")
        if self.on_exceed not in ("drop", "error"):
            raise InputError(f"unknown on_exceed action: {self.on_exceed!r}")
        if self.max_gap < 0:
            raise InputError("max_gap must be >= 0")


class ReturnPanel:
    """Aligned date-by-asset matrix of daily returns plus market caps.

    Immutable after construction; the arrays are marked read-only so the
    panel can be shared freely across threads.
    """

    def __init__(self, dates, symbols, returns, caps):
        dates = tuple(dates)
        symbols = tuple(symbols)
        returns = np.ascontiguousarray(returns, dtype=np.float64)
        caps = np.ascontiguousarray(caps, dtype=np.float64)
        T, n = returns.shape
        if len(dates) != T or caps.shape != (T, n) or len(symbols) != n:
            raise InputError("panel fields have inconsistent shapes")
        if n < 1 or T < 1:
            raise InputError("panel needs at least one asset and one date")
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise InputError("panel dates must be strictly increasing")
        if not np.all(np.isfinite(returns)) or not np.all(np.isfinite(caps)):
            raise InputError("panel contains non-finite cells")
        returns.flags.writeable = False
        caps.flags.writeable = False
        self.dates: tuple[dt.date, ...] = dates
        self.symbols: tuple[str, ...] = symbols
        self.returns: np.ndarray = returns
        self.caps: np.ndarray = caps

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.symbols)

    def __eq__(self, other):
        return (
            isinstance(other, ReturnPanel)
            and self.dates == other.dates
            and self.symbols == other.symbols
            and np.array_equal(self.returns, other.returns)
            and np.array_equal(self.caps, other.caps)
        )

    def __repr__(self):
        return (
            f"ReturnPanel({self.n_dates} dates x {self.n_assets} assets, "
            f"{self.dates[0]}..{self.dates[-1]})"
        )


def _parse_positive(text: str, line_no: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"line {line_no}: malformed {what}: {text!r}") from None
    if not math.isfinite(value):
        raise InputError(f"line {line_no}: non-finite {what}: {text!r}")
    if value <= 0:
        raise InputError(f"line {line_no}: nonpositive {what}: {text!r}")
    return value


def _parse_date(text: str, line_no: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise InputError(f"line {line_no}: malformed date: {text!r}") from None


def load_records(path, fmt: str = "prices-long", caps_path=None) -> list[AssetRecord]:
    """Parse raw observations from ``path`` under the declared format.

    Row order is preserved. Malformed rows, nonpositive prices or caps,
    and duplicate (symbol, date) keys raise InputError naming the line.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"input file not found: {path}")
    if fmt == "prices-long":
        return _load_long(path)
    if fmt == "prices-wide":
        return _load_wide(path, caps_path)
    raise InputError(f"unknown input format: {fmt!r}")


def _load_long(path: Path) -> list[AssetRecord]:
    records: list[AssetRecord] = []
    seen: set[tuple[str, dt.date]] = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        if [h.strip() for h in header] != LONG_HEADER:
            raise InputError(
                f"{path}: expected header {','.join(LONG_HEADER)!r}, got {','.join(header)!r}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise InputError(f"line {line_no}: expected 4 fields, got {len(row)}")
            date = _parse_date(row[0], line_no)
            symbol = row[1].strip()
            if not symbol:
                raise InputError(f"line {line_no}: empty symbol")
            close = _parse_positive(row[2], line_no, "price")
            cap = _parse_positive(row[3], line_no, "market cap")
            key = (symbol, date)
            if key in seen:
                raise InputError(f"line {line_no}: duplicate record for {key}")
            seen.add(key)
            records.append(AssetRecord(symbol, date, close, cap))
    return records


def default_caps_path(path: Path) -> Path:
    return path.with_name(path.stem + "_caps" + path.suffix)


def _load_wide_table(path: Path) -> tuple[list[str], dict[tuple[str, dt.date], float]]:
    """Wide file -> (symbols, {(symbol, date): value}); empty cells skipped."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        if not header or header[0].strip() != "date" or len(header) < 2:
            raise InputError(f"{path}: expected header 'date,<symbol>,...'")
        symbols = [h.strip() for h in header[1:]]
        if len(set(symbols)) != len(symbols):
            raise InputError(f"{path}: duplicate symbol columns")
        values: dict[tuple[str, dt.date], float] = {}
        seen_dates: set[dt.date] = set()
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise InputError(
                    f"line {line_no}: expected {len(header)} fields, got {len(row)}"
                )
            date = _parse_date(row[0], line_no)
            if date in seen_dates:
                raise InputError(f"line {line_no}: duplicate date {date}")
            seen_dates.add(date)
            for sym, cell in zip(symbols, row[1:]):
                cell = cell.strip()
                if not cell:
                    continue
                values[(sym, date)] = _parse_positive(cell, line_no, f"value for {sym}")
    return symbols, values


def _load_wide(path: Path, caps_path) -> list[AssetRecord]:
    caps_path = Path(caps_path) if caps_path is not None else default_caps_path(path)
    if not caps_path.exists():
        raise InputError(f"market-cap sibling file not found: {caps_path}")
    symbols, closes = _load_wide_table(path)
    cap_symbols, caps = _load_wide_table(caps_path)
    if set(symbols) != set(cap_symbols):
        raise InputError(
            f"{caps_path}: symbol columns differ from {path} "
            f"({sorted(set(symbols) ^ set(cap_symbols))})"
        )
    records = []
    for (sym, date), close in closes.items():
        cap = caps.get((sym, date))
        if cap is None:
            raise InputError(f"{caps_path}: missing market cap for ({sym}, {date})")
        records.append(AssetRecord(sym, date, close, cap))
    records.sort(key=lambda r: (r.date, r.symbol))
    return records


def _fill_gaps(
    symbol: str,
    obs: dict[dt.date, tuple[float, float]],
    policy: GapPolicy,
) -> dict[dt.date, tuple[float, float]] | None:
    """Apply the gap policy to one asset's history; None drops the asset."""
    days = sorted(obs)
    filled = dict(obs)
    run_start = None
    day = days[0]
    while day < days[-1]:
        day += ONE_DAY
        if day in obs:
            run_start = None
            continue
        if policy.mode == "drop-asset":
            logger.warning("dropping %s: missing day %s", symbol, day)
            return None
        if run_start is None:
            run_start = day
        run_len = (day - run_start).days + 1
        if run_len > policy.max_gap:
            if policy.on_exceed == "error":
                raise InputError(
                    f"{symbol}: gap at {run_start} exceeds max_gap={policy.max_gap}"
                )
            logger.warning(
                "dropping %s: gap at %s exceeds max_gap=%d",
                symbol,
                run_start,
                policy.max_gap,
            )
            return None
        filled[day] = filled[day - ONE_DAY]
    return filled


def build_panel(
    records,
    symbols=None,
    date_range=None,
    gap_policy: GapPolicy | None = None,
    simple_returns: bool = False,
) -> ReturnPanel:
    """Align records on a shared calendar and difference into returns.

    The calendar is the intersection of all surviving assets' dates after
    gap handling; each asset's first date is consumed by differencing.
    Returns are ln(close_t / close_{t-1}) by default, or the simple ratio
    minus one with ``simple_returns``. Caps align to the return dates.
    """
    policy = gap_policy or GapPolicy()
    start, end = date_range if date_range is not None else (None, None)

    by_symbol: dict[str, dict[dt.date, tuple[float, float]]] = {}
    for rec in records:
        if start is not None and rec.date < start:
            continue
        if end is not None and rec.date > end:
            continue
        by_symbol.setdefault(rec.symbol, {})[rec.date] = (rec.close, rec.market_cap)

    wanted = list(symbols) if symbols is not None else sorted(by_symbol)
    if not wanted:
        raise InputError("no symbols requested or present in the records")
    missing = [s for s in wanted if s not in by_symbol]
    if missing:
        raise InputError(f"symbols absent from records in range: {missing}")
    thin = [s for s in wanted if len(by_symbol[s]) < 2]
    if thin:
        raise InputError(f"symbols with fewer than 2 observations in range: {thin}")

    surviving: dict[str, dict[dt.date, tuple[float, float]]] = {}
    for sym in wanted:
        filled = _fill_gaps(sym, by_symbol[sym], policy)
        if filled is not None:
            surviving[sym] = filled
    if not surviving:
        raise InputError("every requested asset was dropped by the gap policy")

    names = [s for s in wanted if s in surviving]
    calendars = [set(surviving[s]) for s in names]
    common = sorted(set.intersection(*calendars))
    if len(common) == 0:
        raise InputError("empty intersection calendar across assets")
    if len(common) < 2:
        raise InputError("intersection calendar too short to difference (need >= 2 days)")

    T = len(common) - 1
    n = len(names)
    rets = np.empty((T, n), dtype=np.float64)
    caps = np.empty((T, n), dtype=np.float64)
    for j, sym in enumerate(names):
        hist = surviving[sym]
        closes = np.array([hist[d][0] for d in common], dtype=np.float64)
        if simple_returns:
            rets[:, j] = closes[1:] / closes[:-1] - 1.0
        else:
            rets[:, j] = np.log(closes[1:] / closes[:-1])
        caps[:, j] = [hist[d][1] for d in common[1:]]
    return ReturnPanel(common[1:], names, rets, caps)


def _write_matrix(path: Path, dates, symbols, matrix: np.ndarray) -> None:
    lines = ["date," + ",".join(symbols)]
    for t, day in enumerate(dates):
        lines.append(day.isoformat() + "," + ",".join(format_float(v) for v in matrix[t]))
    path.write_text("\n".join(lines) + "\n")


def _read_matrix(path: Path) -> tuple[list[dt.date], list[str], np.ndarray]:
    if not path.exists():
        raise InputError(f"panel file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        symbols = [h.strip() for h in header[1:]]
        dates, rows = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputError(f"{path} line {line_no}: ragged row")
            dates.append(_parse_date(row[0], line_no))
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError:
                raise InputError(f"{path} line {line_no}: malformed value") from None
    return dates, symbols, np.array(rows, dtype=np.float64)


def write_panel(panel: ReturnPanel, directory) -> list[Path]:
    """Write the canonical two-file panel representation into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    returns_path = directory / "returns.csv"
    caps_path = directory / "caps.csv"
    _write_matrix(returns_path, panel.dates, panel.symbols, panel.returns)
    _write_matrix(caps_path, panel.dates, panel.symbols, panel.caps)
    return [returns_path, caps_path]


def read_panel(directory) -> ReturnPanel:
    """Reload a panel written by :func:`write_panel` (bit-exact)."""
    directory = Path(directory)
    dates, symbols, returns = _read_matrix(directory / "returns.csv")
    cap_dates, cap_symbols, caps = _read_matrix(directory / "caps.csv")
    if cap_dates != dates or cap_symbols != symbols:
        raise InputError(f"{directory}: returns.csv and caps.csv are misaligned")
    return ReturnPanel(dates, symbols, returns, caps)
