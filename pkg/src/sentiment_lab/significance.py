"""Per-cell significance of a correlation grid.

Two-tailed t-test on each coefficient, Benjamini-Hochberg adjustment across
all defined cells of the grid, the mitigated layer ``rho * (1 - p)`` and the
extreme significant cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .correlation import CorrelationGrid
from .distributions import betainc

DEFAULT_ALPHA = 0.01
MITIGATION_SOURCES = ("raw", "fdr")


def corr_t_statistic(r, n):
    r = np.asarray(r, dtype=float)
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return r * np.sqrt((n - 2.0) / (1.0 - r * r))


def corr_t_test(r, n):
    """Two-tailed p-value of ``t = r sqrt((n-2)/(1-r^2))`` with ``n - 2`` degrees of freedom.

    Uses ``df / (df + t^2) = 1 - r^2``, so ``p = I_{1-r^2}((n-2)/2, 1/2)``
    without forming t. NaN coefficients give NaN.
    """
    r = np.asarray(r, dtype=float)
    n = np.asarray(n, dtype=float)
    r, n = np.broadcast_arrays(r, n)
    out = np.full(r.shape, np.nan)
    ok = ~np.isnan(r) & (n >= 3)
    if np.any(np.abs(r[ok]) > 1):
        raise ValueError("|r| must not exceed 1")
    rr = r[ok] * r[ok]
    out[ok] = betainc((n[ok] - 2.0) / 2.0, 0.5, 1.0 - rr, rr)
    return out if out.ndim else float(out)


def bh_fdr(p_values) -> np.ndarray:
    """Benjamini-Hochberg step-up adjusted p-values, in input order, capped at 1."""
    p = np.asarray(p_values, dtype=float)
    shape = p.shape
    p = p.ravel()
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    if m == 0:
        return p.reshape(shape)
    order = np.argsort(p, kind="stable")
    # m p / rank in exact rationals, rounded once: keeps adjusted >= raw even where
    # float m * p / m would land an ulp below p.
    scaled = np.array([float(Fraction(m) * Fraction(float(v)) / k) for k, v in enumerate(p[order], start=1)])
    adjusted = np.minimum(np.minimum.accumulate(scaled[::-1])[::-1], 1.0)
    out = np.empty(m)
    out[order] = adjusted
    return out.reshape(shape)


def mitigate(correlation, p):
    """``rho * (1 - p)``; undefined cells stay undefined."""
    return np.asarray(correlation, dtype=float) * (1.0 - np.asarray(p, dtype=float))


@dataclass(frozen=True)
class SignificanceGrid:
    raw_p: np.ndarray
    adjusted_p: np.ndarray
    mitigated: np.ndarray
    mask: np.ndarray
    alpha: float
    mitigation: str = "raw"


def assess(grid: CorrelationGrid, alpha: float = DEFAULT_ALPHA, mitigation: str = "raw") -> SignificanceGrid:
    """Raw p, BH-adjusted p over the defined cells, mitigated layer and mask ``adjusted_p < alpha``."""
    if mitigation not in MITIGATION_SOURCES:
        raise ValueError(f"mitigation must be one of {MITIGATION_SOURCES}")
    raw = corr_t_test(grid.values, grid.n)
    adjusted = np.full(raw.shape, np.nan)
    defined = ~np.isnan(raw)
    adjusted[defined] = bh_fdr(raw[defined])
    mitigated = mitigate(grid.values, raw if mitigation == "raw" else adjusted)
    mask = defined & (np.nan_to_num(adjusted, nan=1.0) < alpha)
    return SignificanceGrid(raw, adjusted, mitigated, mask, alpha, mitigation)


def display_market(market_id: str) -> str:
    return market_id.replace("_", " ")


def _extreme(grid, sig, sign):
    vals = np.where(sig.mask & (sign * np.nan_to_num(grid.values) > 0), grid.values, np.nan)
    if np.all(np.isnan(vals)):
        return None
    flat = np.nanargmax(sign * vals)
    i, j = np.unravel_index(flat, vals.shape)
    d, p, v = grid.depths[i], grid.periods[j], float(grid.values[i, j])
    return {
        "depth": int(d),
        "period": int(p),
        "value": v,
        "adjusted_p": float(sig.adjusted_p[i, j]),
        "score": f"S_{d}",
        "equity": f"{display_market(grid.market_id)}({p})",
    }


def best_combinations(grid: CorrelationGrid, sig: SignificanceGrid, alpha: float | None = None) -> dict:
    """Strongest positive and strongest negative cell among the significant ones."""
    if alpha is not None and alpha != sig.alpha:
        mask = ~np.isnan(sig.adjusted_p) & (np.nan_to_num(sig.adjusted_p, nan=1.0) < alpha)
        sig = SignificanceGrid(sig.raw_p, sig.adjusted_p, sig.mitigated, mask, alpha, sig.mitigation)
    report = {
        "market": grid.market_id,
        "method": grid.method,
        "alpha": sig.alpha,
        "significant_cells": int(sig.mask.sum()),
        "max_positive": _extreme(grid, sig, 1.0),
        "min_negative": _extreme(grid, sig, -1.0),
    }
    if report["significant_cells"] == 0:
        report["notice"] = f"no cell with adjusted p below {sig.alpha}"
    return report
