"""Mean correlation per cumulative depth over monthly horizons, and the best depth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import CorrelationGrid
from .errors import ComputationError
from .tables import fmt, write_rows

DEFAULT_STEP = 4
DEFAULT_HORIZONS = 12


def mean_horizon_correlation(values, j: int, s: int = DEFAULT_STEP) -> np.ndarray:
    """Per-row mean of the first ``s * (j + 1)`` columns, skipping undefined cells."""
    values = np.asarray(getattr(values, "values", values), dtype=float)
    width = s * (j + 1)
    if s < 1 or j < 0 or width > values.shape[1]:
        raise ValueError(f"horizon j={j} with step s={s} needs {width} columns, grid has {values.shape[1]}")
    block = values[:, :width]
    count = (~np.isnan(block)).sum(axis=1)
    total = np.nansum(block, axis=1)
    out = np.full(values.shape[0], np.nan)
    np.divide(total, count, out=out, where=count > 0)
    return out


def optimal_depth(curve, depths) -> int:
    """Depth with the highest mean correlation; ties go to the smallest depth."""
    curve = np.asarray(curve, dtype=float)
    if curve.size == 0 or np.all(np.isnan(curve)):
        raise ComputationError("curve has no defined value")
    best = np.nanmax(curve)
    return int(min(d for d, v in zip(depths, curve) if v == best))


@dataclass(frozen=True)
class TradeoffCurve:
    market_id: str
    depths: tuple[int, ...]
    horizons: tuple[int, ...]
    means: np.ndarray
    step: int
    d_opt: dict[int, int | None]


def tradeoff_curves(grid: CorrelationGrid, s: int = DEFAULT_STEP, horizons: int = DEFAULT_HORIZONS) -> TradeoffCurve:
    horizons = min(horizons, len(grid.periods) // s)
    if horizons < 1:
        raise ValueError(f"grid with {len(grid.periods)} periods cannot hold one horizon of step {s}")
    means = np.column_stack([mean_horizon_correlation(grid.values, j, s) for j in range(horizons)])
    d_opt = {}
    for j in range(horizons):
        try:
            d_opt[j + 1] = optimal_depth(means[:, j], grid.depths)
        except ComputationError:
            d_opt[j + 1] = None
    return TradeoffCurve(grid.market_id, tuple(grid.depths), tuple(range(1, horizons + 1)), means, s, d_opt)


def write_curve(curve: TradeoffCurve, path) -> None:
    header = ["depth"] + [f"h{h}" for h in curve.horizons]
    write_rows(path, header, ([d] + [fmt(v) for v in row] for d, row in zip(curve.depths, curve.means)))
