"""Daily and cumulative sentiment scores.

The daily score is ``(pos - neg) / (pos + neg)`` over one day's labelled
headlines; the cumulative score applies the same ratio to the headline counts
pooled over the last ``d`` entries of the series. A zero denominator is the
no-signal value: ``None`` for scalars, NaN inside arrays.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ComputationError, InputError
from .tables import fmt, write_rows

logger = logging.getLogger(__name__)


def daily_score(n_pos: int, n_neg: int, exact: bool = False):
    """Score of one headline set, or ``None`` when no headline is positive or negative.

    ``exact=True`` returns a :class:`~fractions.Fraction`, which makes the
    algebraic identities (additivity in particular) hold without rounding.
    """
    if n_pos < 0 or n_neg < 0:
        raise ValueError("counts must be non-negative")
    total = n_pos + n_neg
    if total == 0:
        return None
    if exact:
        return Fraction(n_pos - n_neg, total)
    return (n_pos - n_neg) / total


@dataclass(frozen=True)
class DailySentiment:
    date: dt.date
    n_pos: int
    n_neg: int
    n_indecisive: int = 0

    def __post_init__(self):
        if min(self.n_pos, self.n_neg, self.n_indecisive) < 0:
            raise ValueError(f"{self.date}: negative headline count")

    @property
    def score(self) -> float | None:
        return daily_score(self.n_pos, self.n_neg)


@dataclass(frozen=True)
class SentimentSeries:
    entries: tuple[DailySentiment, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        for a, b in zip(self.entries, self.entries[1:]):
            if b.date <= a.date:
                raise ValueError(f"dates must be strictly increasing ({a.date} then {b.date})")

    def __len__(self):
        return len(self.entries)

    @property
    def dates(self) -> list[dt.date]:
        return [e.date for e in self.entries]

    def counts(self) -> tuple[np.ndarray, np.ndarray]:
        pos = np.fromiter((e.n_pos for e in self.entries), dtype=np.int64, count=len(self))
        neg = np.fromiter((e.n_neg for e in self.entries), dtype=np.int64, count=len(self))
        return pos, neg

    def scores(self) -> np.ndarray:
        pos, neg = self.counts()
        return _ratio(pos, neg)


@dataclass(frozen=True)
class CumulativeScoreSeries:
    depth: int
    dates: tuple[dt.date, ...]
    values: np.ndarray

    def __len__(self):
        return len(self.dates)


def _ratio(pos: np.ndarray, neg: np.ndarray) -> np.ndarray:
    total = (pos + neg).astype(float)
    out = np.full(total.shape, np.nan)
    ok = total > 0
    out[ok] = (pos - neg)[ok] / total[ok]
    return out


def cumulative_score(series: SentimentSeries, d: int, t: dt.date):
    """Pooled score over the ``d`` entries ending at date ``t`` (inclusive)."""
    if d < 1:
        raise ValueError("depth must be >= 1")
    dates = series.dates
    try:
        end = dates.index(t)
    except ValueError:
        raise ComputationError(f"{t} is not in the series") from None
    if end + 1 < d:
        raise ComputationError(f"only {end + 1} entries up to {t}, depth {d} requested")
    window = series.entries[end + 1 - d: end + 1]
    return daily_score(sum(e.n_pos for e in window), sum(e.n_neg for e in window))


def cumulative_series(series: SentimentSeries, d: int) -> CumulativeScoreSeries:
    """Rolling pooled score for every date with at least ``d`` entries of history."""
    if d < 1:
        raise ValueError("depth must be >= 1")
    if len(series) == 0:
        raise ComputationError("empty sentiment series")
    if d > len(series):
        logger.warning("depth %d exceeds series length %d, no points produced", d, len(series))
        return CumulativeScoreSeries(d, (), np.empty(0))
    pos, neg = series.counts()
    cp = np.concatenate(([0], np.cumsum(pos)))
    cn = np.concatenate(([0], np.cumsum(neg)))
    wpos = cp[d:] - cp[:-d]
    wneg = cn[d:] - cn[:-d]
    return CumulativeScoreSeries(d, tuple(series.dates[d - 1:]), _ratio(wpos, wneg))


def signal_family(series: SentimentSeries, depths) -> dict[int, CumulativeScoreSeries]:
    return {int(d): cumulative_series(series, int(d)) for d in depths}


# -- files -------------------------------------------------------------------

def read_sentiments(path, metadata: dict | None = None) -> SentimentSeries:
    """Read ``date,n_pos,n_neg,n_indecisive`` CSV into a series."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"cannot read sentiments file {path}")
    entries = []
    with path.open(encoding="utf-8", newline="") as fh:
        for lineno, rec in enumerate(csv.DictReader(fh), start=2):
            try:
                entries.append(DailySentiment(
                    dt.date.fromisoformat(rec["date"]), int(rec["n_pos"]), int(rec["n_neg"]),
                    int(rec.get("n_indecisive") or 0)))
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: bad sentiment row ({exc})") from exc
    try:
        return SentimentSeries(entries, metadata or {"source": str(path)})
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def write_sentiments(entries, path) -> None:
    write_rows(path, ["date", "n_pos", "n_neg", "n_indecisive"],
               ([e.date.isoformat(), e.n_pos, e.n_neg, e.n_indecisive] for e in entries))


def write_signal(cum: CumulativeScoreSeries, path) -> None:
    write_rows(path, ["date", "value"], ([d.isoformat(), fmt(v)] for d, v in zip(cum.dates, cum.values)))


def read_signal(path, depth: int) -> CumulativeScoreSeries:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    values = np.array([float(r["value"]) if r["value"] else np.nan for r in rows])
    return CumulativeScoreSeries(depth, tuple(dt.date.fromisoformat(r["date"]) for r in rows), values)
