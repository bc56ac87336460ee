"""Pearson and Spearman grids between cumulative-score depths and return periods.

Cells are computed on the inner join of score dates and return stamps; dates
where either side is missing or no-signal are dropped per cell. Cells with
fewer than three points or a constant side are undefined (NaN), never 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ComputationError
from .market import ReturnGrid
from .tables import label_number, read_matrix, write_matrix

METHODS = ("pearson", "spearman")
MIN_N = 3


def pearson(x, y) -> float:
    """Product-moment correlation; NaN when either side has zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two 1-D sequences of equal length")
    if len(x) < MIN_N:
        raise ValueError(f"pearson needs at least {MIN_N} points")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = np.dot(xc, xc)
    syy = np.dot(yc, yc)
    if sxx == 0.0 or syy == 0.0:
        return float("nan")
    r = np.dot(xc, yc) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def average_ranks(x) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    return rankdata(x, method="average")


def spearman(x, y) -> float:
    return pearson(average_ranks(x), average_ranks(y))


@dataclass(frozen=True)
class CorrelationGrid:
    market_id: str
    depths: tuple[int, ...]
    periods: tuple[int, ...]
    values: np.ndarray
    n: np.ndarray
    method: str

    @property
    def row_labels(self):
        return [f"cum_{d}" for d in self.depths]

    @property
    def col_labels(self):
        return [f"ret_{p}" for p in self.periods]

    def cell(self, depth: int, period: int) -> float:
        return float(self.values[self.depths.index(depth), self.periods.index(period)])


def align(score_family: dict, return_grid: ReturnGrid):
    """Put every depth and period on one sorted date axis.

    Returns ``(dates, depths, X, periods, Y)`` with NaN wherever a date has
    no value for that column.
    """
    depths = tuple(sorted(score_family))
    periods = tuple(return_grid.periods)
    dates = set()
    for cum in score_family.values():
        dates.update(cum.dates)
    for col in return_grid.columns.values():
        dates.update(col.stamps)
    dates = sorted(dates)
    pos = {d: i for i, d in enumerate(dates)}
    X = np.full((len(dates), len(depths)), np.nan)
    for j, d in enumerate(depths):
        cum = score_family[d]
        X[[pos[t] for t in cum.dates], j] = cum.values
    Y = np.full((len(dates), len(periods)), np.nan)
    for j, p in enumerate(periods):
        col = return_grid.columns[p]
        Y[[pos[t] for t in col.stamps], j] = col.values
    return dates, depths, X, periods, Y


def _centered(A, mask):
    # Centering on column means first keeps the moment sums well conditioned.
    count = mask.sum(axis=0)
    total = np.where(mask, A, 0.0).sum(axis=0)
    mean = np.divide(total, count, out=np.zeros_like(total), where=count > 0)
    return np.where(mask, A - mean, 0.0)


def _pearson_grid(X, Y):
    mx = ~np.isnan(X)
    my = ~np.isnan(Y)
    fx, fy = mx.astype(float), my.astype(float)
    xc = _centered(X, mx)
    yc = _centered(Y, my)
    n = fx.T @ fy
    sx = xc.T @ fy
    sy = fx.T @ yc
    sxx = (xc * xc).T @ fy
    syy = fx.T @ (yc * yc)
    sxy = xc.T @ yc
    with np.errstate(invalid="ignore", divide="ignore"):
        vx = sxx - sx * sx / n
        vy = syy - sy * sy / n
        cov = sxy - sx * sy / n
        r = cov / np.sqrt(vx * vy)
    tol = 64 * np.finfo(float).eps
    undefined = (n < MIN_N) | (vx <= tol * sxx) | (vy <= tol * syy)
    r = np.clip(r, -1.0, 1.0)
    r[undefined] = np.nan
    return r, n.round().astype(int)


def _spearman_grid(X, Y):
    mx = ~np.isnan(X)
    my = ~np.isnan(Y)
    D, P = X.shape[1], Y.shape[1]
    r = np.full((D, P), np.nan)
    n = np.zeros((D, P), dtype=int)
    for i in range(D):
        for j in range(P):
            m = mx[:, i] & my[:, j]
            k = int(m.sum())
            n[i, j] = k
            if k >= MIN_N:
                r[i, j] = spearman(X[m, i], Y[m, j])
    return r, n


def build_grid(score_family: dict, return_grid: ReturnGrid, method: str = "pearson") -> CorrelationGrid:
    """Correlate every cumulative depth against every return period.

    ``score_family`` maps depth to :class:`~sentiment_lab.signal.CumulativeScoreSeries`.
    """
    if method not in METHODS:
        raise ValueError(f"unknown correlation method {method!r}")
    _, depths, X, periods, Y = align(score_family, return_grid)
    if method == "pearson":
        r, n = _pearson_grid(X, Y)
    else:
        r, n = _spearman_grid(X, Y)
    if not (n >= MIN_N).any():
        raise ComputationError(f"{return_grid.market_id}: score dates and return stamps do not overlap")
    return CorrelationGrid(return_grid.market_id, depths, periods, r, n, method)


def write_grid(grid: CorrelationGrid, corr_path, n_path=None) -> None:
    write_matrix(corr_path, grid.values, grid.row_labels, grid.col_labels)
    if n_path is not None:
        write_matrix(n_path, grid.n, grid.row_labels, grid.col_labels)


def read_grid(corr_path, n_path=None, market_id: str = "", method: str = "pearson") -> CorrelationGrid:
    values, rows, cols = read_matrix(corr_path)
    if n_path is not None:
        n = read_matrix(n_path)[0]
        n = np.nan_to_num(n).astype(int)
    else:
        n = np.zeros(values.shape, dtype=int)
    return CorrelationGrid(market_id, tuple(label_number(r) for r in rows), tuple(label_number(c) for c in cols),
                           values, n, method)
