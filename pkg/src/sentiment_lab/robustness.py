"""Is the correlation pattern shared across markets?

Two views: an element-wise t statistic of each market against the cross-market
mean matrix, and a quantile distance between each market and the mean matrix
after replacing every cell by its within-matrix quantile rank.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .distributions import student_t_cdf, student_t_two_sided
from .errors import ComputationError

DEFAULT_TAU = 0.10
QUANTILE_CONVENTIONS = ("rank", "midrank")


@dataclass(frozen=True)
class MarketMatrixSet:
    matrices: np.ndarray  # (markets, depths, periods)
    market_ids: tuple[str, ...]
    row_labels: tuple = ()
    col_labels: tuple = ()

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=float)
        if m.ndim != 3:
            raise ValueError("matrices must stack to a 3-D array")
        if m.shape[0] < 2:
            raise ValueError("need at least two markets")
        if len(self.market_ids) != m.shape[0]:
            raise ValueError("one market id per matrix")
        object.__setattr__(self, "matrices", m)
        object.__setattr__(self, "market_ids", tuple(self.market_ids))

    @classmethod
    def from_grids(cls, grids):
        grids = list(grids)
        shapes = {g.values.shape for g in grids}
        labels = {(tuple(g.depths), tuple(g.periods)) for g in grids}
        if len(shapes) != 1 or len(labels) != 1:
            raise ValueError("all grids must share shape and labels")
        return cls(np.stack([g.values for g in grids]), tuple(g.market_id for g in grids),
                   tuple(grids[0].row_labels), tuple(grids[0].col_labels))

    @property
    def n(self) -> int:
        return self.matrices.shape[0]


def mean_matrix(mset: MarketMatrixSet) -> np.ndarray:
    """Cellwise mean across markets; a cell undefined in any market is undefined.

    Computed as the first market plus the mean deviation from it, which is exact
    when all markets agree.
    """
    m = mset.matrices
    return m[0] + (m - m[0]).mean(axis=0)


def std_matrix(mset: MarketMatrixSet, Z=None) -> np.ndarray:
    """Cellwise sample standard deviation across markets (divisor n - 1)."""
    Z = mean_matrix(mset) if Z is None else Z
    dev = mset.matrices - Z
    return np.sqrt((dev * dev).sum(axis=0) / (mset.n - 1))


def zscore_set(mset: MarketMatrixSet) -> MarketMatrixSet:
    """Standardize every market cellwise by the cross-market mean and deviation."""
    Z = mean_matrix(mset)
    S = std_matrix(mset, Z)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(S > 0, (mset.matrices - Z) / S, np.nan)
    return MarketMatrixSet(scaled, mset.market_ids, mset.row_labels, mset.col_labels)


def elementwise_t(mset: MarketMatrixSet, Z, sigma, paper_formula: bool = False):
    """T = (M - Z) / sigma per market, with Student(n - 1) p-values.

    Returns ``(T, p)`` or ``(T, p, p_printed)`` when ``paper_formula`` is set,
    where ``p_printed = 1 - 2 (1 - CDF(|T|))`` is the central mass |T| encloses.
    Cells with zero deviation are undefined.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        T = np.where(sigma > 0, (mset.matrices - Z) / sigma, np.nan)
    df = mset.n - 1
    p = np.full(T.shape, np.nan)
    ok = ~np.isnan(T)
    p[ok] = student_t_two_sided(T[ok], df)
    if not paper_formula:
        return T, p
    printed = np.full(T.shape, np.nan)
    printed[ok] = 1.0 - 2.0 * (1.0 - student_t_cdf(np.abs(T[ok]), df))
    return T, p, printed


def pattern_percentage(p, alpha: float = 0.01) -> float:
    """Share (in %) of defined cells whose p-value is below ``alpha``."""
    p = np.asarray(p, dtype=float)
    defined = ~np.isnan(p)
    if not defined.any():
        raise ComputationError("p matrix has no defined cell")
    return 100.0 * float((p[defined] < alpha).sum()) / float(defined.sum())


def quantile_transform(matrix, convention: str = "rank") -> np.ndarray:
    """Replace each defined cell by its quantile rank within the matrix.

    ``rank`` gives rank/N in (0, 1]; ``midrank`` gives (rank - 0.5)/N. Ties
    share the average rank.
    """
    if convention not in QUANTILE_CONVENTIONS:
        raise ValueError(f"convention must be one of {QUANTILE_CONVENTIONS}")
    m = np.asarray(matrix, dtype=float)
    defined = ~np.isnan(m)
    N = int(defined.sum())
    if N == 0:
        raise ComputationError("matrix has no defined cell")
    ranks = rankdata(m[defined], method="average")
    if convention == "midrank":
        ranks = ranks - 0.5
    out = np.full(m.shape, np.nan)
    out[defined] = ranks / N
    return out


@dataclass(frozen=True)
class QuantileDistance:
    mean: float
    layer: np.ndarray
    pct_within: float
    pct_above: float


def quantile_distance(A, B, tau: float = DEFAULT_TAU, convention: str = "rank") -> QuantileDistance:
    """Mean |Q_A - Q_B| over cells defined in both, and the share of cells within ``tau``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    layer = np.abs(quantile_transform(A, convention) - quantile_transform(B, convention))
    both = ~np.isnan(layer)
    if not both.any():
        raise ComputationError("no cell defined in both matrices")
    diffs = layer[both]
    within = 100.0 * float((diffs <= tau).sum()) / diffs.size
    return QuantileDistance(float(diffs.mean()), layer, within, 100.0 - within)


@dataclass
class RobustnessReport:
    market_ids: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    T: np.ndarray
    p: np.ndarray
    p_printed: np.ndarray | None
    quantile_layers: np.ndarray
    alpha: float
    tau: float
    undefined_mean_cells: int
    undefined_t_cells: int
    zero_std: np.ndarray | None = None
    markets: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "markets": list(self.market_ids),
            "alpha": self.alpha,
            "tau": self.tau,
            "degrees_of_freedom": len(self.market_ids) - 1,
            "undefined_mean_cells": self.undefined_mean_cells,
            "undefined_t_cells": self.undefined_t_cells,
            "zero_std_cells": int(self.zero_std.sum()) if self.zero_std is not None else 0,
            "per_market": self.markets,
        }


def robustness_report(mset: MarketMatrixSet, alpha: float = 0.01, tau: float = DEFAULT_TAU,
                      paper_formula: bool = False, zscore: bool = False,
                      convention: str = "rank") -> RobustnessReport:
    work = zscore_set(mset) if zscore else mset
    Z = mean_matrix(work)
    sigma = std_matrix(work, Z)
    res = elementwise_t(work, Z, sigma, paper_formula=paper_formula)
    T, p = res[0], res[1]
    printed = res[2] if paper_formula else None
    layers = []
    per_market = {}
    for k, mid in enumerate(mset.market_ids):
        entry = {}
        try:
            entry["pct_p_below_alpha"] = pattern_percentage(p[k], alpha)
        except ComputationError:
            entry["pct_p_below_alpha"] = None
        if printed is not None:
            try:
                entry["pct_printed_p_below_alpha"] = pattern_percentage(printed[k], alpha)
            except ComputationError:
                entry["pct_printed_p_below_alpha"] = None
        qd = quantile_distance(mset.matrices[k], mean_matrix(mset), tau, convention)
        layers.append(qd.layer)
        entry.update(quantile_distance=qd.mean, pct_quantile_within_tau=qd.pct_within,
                     pct_quantile_above_tau=qd.pct_above)
        per_market[mid] = entry
    return RobustnessReport(
        market_ids=mset.market_ids, mean=Z, std=sigma, T=T, p=p, p_printed=printed,
        quantile_layers=np.stack(layers), alpha=alpha, tau=tau,
        undefined_mean_cells=int(np.isnan(Z).sum()),
        undefined_t_cells=int(np.isnan(T[0]).sum()),
        zero_std=sigma == 0,
        markets=per_market,
    )
