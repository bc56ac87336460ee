"""Command line entry point: ``sentiment-lab <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 bad input, 4 LLM backend, 5 response parse,
6 computation, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import InputError, LabError


def _grid(text: str) -> tuple[int, ...]:
    """``5:245:5`` or ``5,10,20``."""
    try:
        if ":" in text:
            start, stop, step = (int(v) for v in text.split(":"))
            return tuple(range(start, stop + 1, step))
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}, use start:stop:step or a comma list") from None


def _config(args):
    from .pipeline import PipelineConfig, load_config

    return load_config(args.config) if args.config else PipelineConfig()


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_ingest(args):
    from .corpus import filter_stats, load_corpus, write_corpus

    result = load_corpus(args.input, args.format)
    write_corpus(result.documents, args.out)
    _dump(filter_stats(result).to_dict())


def cmd_score_news(args):
    from .corpus import load_corpus
    from .llm import score_corpus
    from .pipeline import make_client
    from .signal import write_sentiments

    cfg = _config(args)
    cfg.cache = str(Path(args.cache).resolve())
    if args.backend:
        cfg.backend.kind = args.backend
    if args.model_id:
        cfg.backend.model_id = args.model_id
    client = make_client(cfg)
    docs = load_corpus(args.corpus, "jsonl").documents
    counts = score_corpus(docs, client, args.workers or cfg.backend.max_workers)
    write_sentiments(counts, args.out)
    _dump({"documents": len(docs), "backend_calls": client.backend_calls, "model_id": client.model_id})


def cmd_build_signal(args):
    from .signal import cumulative_series, read_sentiments, write_signal

    series = read_sentiments(args.sentiments)
    cum = cumulative_series(series, args.depth)
    write_signal(cum, args.out)
    _dump({"depth": args.depth, "points": len(cum)})


def cmd_returns(args):
    from .market import audit_leakage, build_return_grid, load_prices, write_return_grid

    cfg = _config(args)
    periods = args.periods or cfg.periods.values()
    prices = load_prices(args.prices, args.market)
    grid = build_return_grid(prices, periods, args.mode or cfg.alignment)
    write_return_grid(grid, args.out)
    problems = audit_leakage(prices, grid)
    _dump({"market": args.market, "mode": grid.mode, "periods": len(periods), "audit_problems": len(problems)})
    if problems:
        raise InputError(f"leakage audit failed: {problems[0]}")


def _return_grid_from_csv(path, market):
    from .market import ReturnColumn, ReturnGrid, read_return_table

    stamps, periods, values = read_return_table(path)
    cols = {}
    for j, p in enumerate(periods):
        keep = [i for i in range(len(stamps)) if values[i, j] == values[i, j]]
        st = tuple(stamps[i] for i in keep)
        cols[p] = ReturnColumn(p, "file", st, values[keep, j], st, st)
    return ReturnGrid(market, tuple(periods), cols, "file")


def cmd_correlate(args):
    from .correlation import build_grid, write_grid
    from .signal import read_sentiments, signal_family

    cfg = _config(args)
    depths = args.depths or cfg.depths.values()
    family = signal_family(read_sentiments(args.sentiments), depths)
    rg = _return_grid_from_csv(args.returns, args.market)
    grid = build_grid(family, rg, args.method)
    out = Path(args.out)
    n_path = out.with_name(out.stem.removesuffix("_corr") + "_n.csv")
    write_grid(grid, out, n_path)
    _dump({"market": args.market, "method": args.method, "cells": int(grid.values.size),
           "defined": int((grid.values == grid.values).sum())})


def cmd_significance(args):
    from .correlation import read_grid
    from .significance import assess, best_combinations
    from .tables import write_matrix

    cfg = _config(args)
    grid = read_grid(args.grid, args.n, args.market, args.method)
    alpha = args.alpha or cfg.alpha
    sig = assess(grid, alpha, args.mitigation or cfg.mitigation)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.grid).stem.removesuffix("_corr")
    write_matrix(out / f"{stem}_rawp.csv", sig.raw_p, grid.row_labels, grid.col_labels)
    write_matrix(out / f"{stem}_adjp.csv", sig.adjusted_p, grid.row_labels, grid.col_labels)
    write_matrix(out / f"{stem}_mitigated.csv", sig.mitigated, grid.row_labels, grid.col_labels)
    best = best_combinations(grid, sig)
    (out / f"{stem}_best.json").write_text(json.dumps(best, indent=2, sort_keys=True) + "\n")
    _dump(best)


def cmd_tradeoff(args):
    from .correlation import read_grid
    from .tradeoff import tradeoff_curves, write_curve

    cfg = _config(args)
    grid = read_grid(args.grid, market_id=args.market)
    curve = tradeoff_curves(grid, args.s or cfg.s, cfg.horizons)
    write_curve(curve, args.out)
    _dump({"market": args.market, "step": curve.step, "d_opt": {str(k): v for k, v in curve.d_opt.items()}})


def cmd_robustness(args):
    from .correlation import read_grid
    from .robustness import MarketMatrixSet, robustness_report
    from .tables import write_matrix

    cfg = _config(args)
    if len(args.grids) != len(args.markets):
        raise InputError("give one market id per grid")
    grids = [read_grid(g, market_id=m) for g, m in zip(args.grids, args.markets)]
    mset = MarketMatrixSet.from_grids(grids)
    rep = robustness_report(mset, args.alpha or cfg.alpha, args.tau or cfg.tau,
                            args.paper_formula or cfg.paper_formula, args.zscore or cfg.zscore,
                            cfg.quantile_convention)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows, cols = mset.row_labels, mset.col_labels
    write_matrix(out / "mean.csv", rep.mean, rows, cols)
    write_matrix(out / "std.csv", rep.std, rows, cols)
    for k, mid in enumerate(mset.market_ids):
        write_matrix(out / f"{mid}_T.csv", rep.T[k], rows, cols)
        write_matrix(out / f"{mid}_p.csv", rep.p[k], rows, cols)
        write_matrix(out / f"{mid}_Q.csv", rep.quantile_layers[k], rows, cols)
        if rep.p_printed is not None:
            write_matrix(out / f"{mid}_p_printed.csv", rep.p_printed[k], rows, cols)
    (out / "report.json").write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    _dump(rep.to_dict())


def cmd_report(args):
    from .report import build_report

    cfg = _config(args)
    written = build_report(args.run_dir, alpha=cfg.alpha, signal_depth=cfg.signal_plot_depth)
    _dump({"written": [str(p) for p in written]})


def cmd_synth(args):
    from .synthetic import generate_synthetic_fixture, write_fixture

    fx = generate_synthetic_fixture(args.seed, args.depth, args.period, args.beta, n_days=args.days,
                                    noise=args.noise)
    path = write_fixture(fx, args.out_dir)
    _dump({"config": str(path), **fx.params})


def cmd_run(args):
    from .pipeline import run_pipeline

    if not args.config:
        raise InputError("run needs --config")
    cfg = _config(args)
    manifest = run_pipeline(cfg)
    _dump({"output_dir": str(cfg.path(cfg.output_dir)), "outputs": len(manifest["outputs"])})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON pipeline config supplying defaults")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sentiment-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="filter a raw corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("score-news", parents=[common], help="two-step LLM scoring with replay cache")
    p.add_argument("--corpus", required=True)
    p.add_argument("--cache", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--backend", choices=["replay", "http", "keyword"])
    p.add_argument("--model-id")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_score_news)

    p = sub.add_parser("build-signal", parents=[common], help="cumulative score for one depth")
    p.add_argument("--sentiments", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_signal)

    p = sub.add_parser("returns", parents=[common], help="return grid for one market")
    p.add_argument("--prices", required=True)
    p.add_argument("--market", required=True)
    p.add_argument("--periods", type=_grid)
    p.add_argument("--mode", choices=["forward", "paper_stamp"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_returns)

    p = sub.add_parser("correlate", parents=[common], help="correlation grid for one market")
    p.add_argument("--sentiments", required=True)
    p.add_argument("--returns", required=True)
    p.add_argument("--market", default="")
    p.add_argument("--method", choices=["pearson", "spearman"], default="pearson")
    p.add_argument("--depths", type=_grid)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("significance", parents=[common], help="t-test, FDR and mitigated layers")
    p.add_argument("--grid", required=True)
    p.add_argument("--n", required=True, help="sample-size layer written next to the grid")
    p.add_argument("--market", default="")
    p.add_argument("--method", default="pearson")
    p.add_argument("--alpha", type=float)
    p.add_argument("--mitigation", choices=["raw", "fdr"])
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_significance)

    p = sub.add_parser("tradeoff", parents=[common], help="mean correlation per depth and d_opt")
    p.add_argument("--grid", required=True)
    p.add_argument("--market", default="")
    p.add_argument("--s", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("robustness", parents=[common], help="cross-market pattern statistics")
    p.add_argument("--grids", nargs="+", required=True)
    p.add_argument("--markets", nargs="+", required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--paper-formula", action="store_true")
    p.add_argument("--zscore", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("report", parents=[common], help="figures and tables from a run directory")
    p.add_argument("--run-dir", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic fixture with a planted signal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=40)
    p.add_argument("--period", type=int, default=20)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--days", type=int, default=3500)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", parents=[common], help="full pipeline from --config")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
