"""Index price series and period returns on a trading-day grid.

Two alignments are supported:

``paper_stamp``
    the trailing return over ``(t - p, t]`` is stamped on the trading day
    after ``t``, so every stamped value only uses prices dated before its stamp;
``forward``
    the return over ``(t, t + p]`` is attached to ``t`` as a prediction
    target. It becomes known at ``t + p``, which is recorded per value.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .tables import fmt, write_rows

logger = logging.getLogger(__name__)

ALIGNMENT_MODES = ("paper_stamp", "forward")


@dataclass(frozen=True)
class PriceSeries:
    market_id: str
    dates: tuple[dt.date, ...]
    prices: np.ndarray

    def __post_init__(self):
        if len(self.dates) != len(self.prices):
            raise ValueError("dates and prices differ in length")
        if np.any(~(np.asarray(self.prices) > 0)):
            raise ValueError(f"{self.market_id}: prices must be positive")
        for a, b in zip(self.dates, self.dates[1:]):
            if b <= a:
                raise ValueError(f"{self.market_id}: dates must be strictly increasing")

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class ReturnColumn:
    """Returns for one period. ``start``/``end`` are the price dates each value was computed from."""

    period: int
    mode: str
    stamps: tuple[dt.date, ...]
    values: np.ndarray
    start: tuple[dt.date, ...]
    end: tuple[dt.date, ...]

    def as_dict(self) -> dict[dt.date, float]:
        return dict(zip(self.stamps, self.values))


@dataclass(frozen=True)
class ReturnGrid:
    market_id: str
    periods: tuple[int, ...]
    columns: dict[int, ReturnColumn]
    mode: str


def load_prices(path, market_id: str) -> PriceSeries:
    """Read a ``date,close`` CSV. Unsorted rows are sorted with a warning."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"price file for market {market_id} not found: {path}")
    rows = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"date", "close"} <= set(reader.fieldnames):
            raise InputError(f"{path}: expected header 'date,close'")
        for lineno, rec in enumerate(reader, start=2):
            try:
                date = dt.date.fromisoformat(rec["date"].strip())
            except (ValueError, AttributeError):
                raise InputError(f"{path}:{lineno}: unparseable date {rec['date']!r}") from None
            try:
                close = float(rec["close"])
            except (TypeError, ValueError):
                raise InputError(f"{path}:{lineno}: unparseable close {rec['close']!r}") from None
            if not close > 0:
                raise InputError(f"{path}:{lineno}: non-positive price {close}")
            rows.append((date, close, lineno))
    dates = [r[0] for r in rows]
    if dates != sorted(dates):
        logger.warning("%s: rows not in date order, sorting", path)
        rows.sort(key=lambda r: r[0])
    for a, b in zip(rows, rows[1:]):
        if a[0] == b[0]:
            raise InputError(f"{path}:{b[2]}: duplicate date {b[0]}")
    return PriceSeries(market_id, tuple(r[0] for r in rows), np.array([r[1] for r in rows]))


def write_prices(series: PriceSeries, path) -> None:
    write_rows(path, ["date", "close"], ([d.isoformat(), fmt(p)] for d, p in zip(series.dates, series.prices)))


def next_trading_day(dates, i: int) -> dt.date:
    """Date of the trading day after ``dates[i]``; past the end, the next weekday."""
    if i + 1 < len(dates):
        return dates[i + 1]
    return np.busday_offset(np.datetime64(dates[i], "D"), 1, roll="forward").astype(dt.date)


def returns(series: PriceSeries, p: int, mode: str = "forward") -> ReturnColumn:
    if mode not in ALIGNMENT_MODES:
        raise ValueError(f"unknown alignment mode {mode!r}")
    if p < 1:
        raise ValueError("period must be >= 1")
    n = len(series)
    if p >= n:
        raise InputError(f"{series.market_id}: period {p} needs more than {n} prices")
    P = np.asarray(series.prices, dtype=float)
    values = (P[p:] - P[:-p]) / P[:-p]
    start = series.dates[:-p]
    end = series.dates[p:]
    if mode == "forward":
        stamps = start
    else:
        stamps = tuple(next_trading_day(series.dates, i) for i in range(p, n))
    return ReturnColumn(p, mode, tuple(stamps), values, tuple(start), tuple(end))


def build_return_grid(series: PriceSeries, grid, mode: str = "forward") -> ReturnGrid:
    grid = [int(p) for p in grid]
    if not grid:
        raise ValueError("empty period grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("period grid must be strictly increasing")
    cols = {p: returns(series, p, mode) for p in grid}
    return ReturnGrid(series.market_id, tuple(grid), cols, mode)


def audit_leakage(series: PriceSeries, grid: ReturnGrid) -> list[str]:
    """Check every stamped value against the prices it claims to use.

    Returns a list of violations (empty when clean): a source price dated after
    the stamp (paper_stamp mode only), a wrong period gap, or a value that does
    not match the recorded source prices.
    """
    index = {d: i for i, d in enumerate(series.dates)}
    problems = []
    for p, col in grid.columns.items():
        for stamp, value, a, b in zip(col.stamps, col.values, col.start, col.end):
            if a not in index or b not in index:
                problems.append(f"p={p} {stamp}: source date missing from price series")
                continue
            ia, ib = index[a], index[b]
            if ib - ia != p:
                problems.append(f"p={p} {stamp}: source prices {p} trading days apart expected")
            expected = (series.prices[ib] - series.prices[ia]) / series.prices[ia]
            if value != expected:
                problems.append(f"p={p} {stamp}: value does not match source prices")
            if grid.mode == "paper_stamp" and (a > stamp or b > stamp):
                problems.append(f"p={p} {stamp}: uses price dated {b} after its stamp")
    return problems


def write_return_grid(grid: ReturnGrid, path) -> None:
    stamps = sorted({s for col in grid.columns.values() for s in col.stamps})
    lookup = {p: col.as_dict() for p, col in grid.columns.items()}
    header = ["stamp"] + [f"ret_p{p}" for p in grid.periods]
    write_rows(path, header, ([s.isoformat()] + [fmt(lookup[p].get(s)) for p in grid.periods] for s in stamps))


def read_return_table(path) -> tuple[list[dt.date], list[int], np.ndarray]:
    """Load a return-grid CSV as ``(stamps, periods, values)`` with NaN where a period has no value."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    periods = [int(h[len("ret_p"):]) for h in rows[0][1:]]
    stamps = [dt.date.fromisoformat(r[0]) for r in rows[1:]]
    values = np.array([[float(v) if v else np.nan for v in r[1:]] for r in rows[1:]], dtype=float)
    return stamps, periods, values.reshape(len(stamps), len(periods))
