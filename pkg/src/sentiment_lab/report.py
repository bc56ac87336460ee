"""Figures and markdown tables rebuilt from a run directory's persisted CSV/JSON layers only."""

from __future__ import annotations

import csv
import datetime as dt
import json
from pathlib import Path

import numpy as np

from .signal import read_sentiments
from .tables import read_matrix


def _markdown(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _fmt2(x) -> str:
    return "" if x is None else f"{x:.2f}"


def best_combination_tables(best: dict) -> str:
    pos, neg = [], []
    for mid, rep in best["markets"].items():
        if rep.get("max_positive"):
            r = rep["max_positive"]
            pos.append((r["score"], r["equity"], _fmt2(r["value"])))
        if rep.get("min_negative"):
            r = rep["min_negative"]
            neg.append((r["score"], r["equity"], _fmt2(r["value"])))
    return ("Highest positive significant correlation by market\n\n"
            + _markdown(["Score", "Equity", "Positive Correlation"], pos)
            + "\nLowest negative significant correlation by market\n\n"
            + _markdown(["Score", "Equity", "Negative Correlation"], neg))


def d_opt_table(d_opt: dict, horizon: str = "1") -> str:
    rows = [(mid.replace("_", " "), v.get(horizon)) for mid, v in d_opt["d_opt"].items()]
    return _markdown(["Equity", "d_opt"], rows)


def robustness_tables(rep: dict) -> str:
    rows = []
    for mid, m in rep["per_market"].items():
        t = m["pct_p_below_alpha"]
        rows.append((mid.replace("_", " "), "" if t is None else f"{t:.0f}",
                     f"{m['pct_quantile_within_tau']:.0f}", f"{m['quantile_distance']:.4f}"))
    return _markdown(["Equity Market", "% of matrix p < alpha", "% of matrix |dQ| <= tau", "mean |dQ|"], rows)


def _read_wide_signal(path, column):
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or column not in rows[0]:
        return None, None
    dates = [dt.date.fromisoformat(r["date"]) for r in rows]
    return dates, np.array([float(r[column]) if r[column] else np.nan for r in rows])


def build_report(run_dir, figures: bool = True, alpha: float = 0.01, signal_depth: int = 20) -> list[Path]:
    run = Path(run_dir)
    tables = run / "tables"
    tables.mkdir(exist_ok=True)
    written = []

    for f in sorted((run / "significance").glob("best_combinations_*.json")):
        method = f.stem.rsplit("_", 1)[-1]
        p = tables / f"best_combinations_{method}.md"
        p.write_text(best_combination_tables(json.loads(f.read_text())), encoding="utf-8")
        written.append(p)
    for f in sorted((run / "tradeoff").glob("d_opt_*.json")):
        method = f.stem.rsplit("_", 1)[-1]
        p = tables / f"d_opt_{method}.md"
        p.write_text(d_opt_table(json.loads(f.read_text())), encoding="utf-8")
        written.append(p)
    for f in sorted((run / "robustness").glob("*_report.json")):
        method = f.stem.rsplit("_", 1)[0]
        p = tables / f"robustness_{method}.md"
        p.write_text(robustness_tables(json.loads(f.read_text())), encoding="utf-8")
        written.append(p)

    if not figures:
        return written

    from .plots import render_heatmap, render_signal_plot, render_tradeoff

    figs = run / "figures"
    figs.mkdir(exist_ok=True)
    series = read_sentiments(run / "sentiments.csv")
    written.append(render_signal_plot(series.dates, series.scores(), figs / "raw_signal.svg", "Daily sentiment score"))
    dates, values = _read_wide_signal(run / "signals.csv", f"cum_{signal_depth}")
    if dates is not None and not np.all(np.isnan(values)):
        written.append(render_signal_plot(dates, values, figs / f"cumulative_d{signal_depth}.svg",
                                          f"Cumulative sentiment score, d={signal_depth}"))

    for f in sorted((run / "grids").glob("*_corr.csv")):
        values, rows, cols = read_matrix(f)
        written.append(render_heatmap(values, rows, cols, figs / f"{f.stem}.svg", "diverging_corr",
                                      title=f.stem.replace("_corr", "")))
    for f in sorted((run / "significance").glob("*_adjp.csv")):
        values, rows, cols = read_matrix(f)
        written.append(render_heatmap(values, rows, cols, figs / f"{f.stem}.svg", "pvalue_mask", alpha,
                                      title=f"{f.stem} (white: adjusted p < {alpha})"))
    for f in sorted((run / "significance").glob("*_mitigated.csv")):
        values, rows, cols = read_matrix(f)
        written.append(render_heatmap(values, rows, cols, figs / f"{f.stem}.svg", "diverging_corr", title=f.stem))
    for f in sorted((run / "tradeoff").glob("*.csv")):
        with f.open(encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        horizons = [h[1:] for h in rows[0][1:]]
        depths = [int(r[0]) for r in rows[1:]]
        means = np.array([[float(v) if v else np.nan for v in r[1:]] for r in rows[1:]])
        written.append(render_tradeoff(depths, means, horizons, figs / f"tradeoff_{f.stem}.svg", f.stem))
    return written
