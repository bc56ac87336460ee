"""End-to-end run: ingest, scoring, signals, returns, grids, significance, trade-off, robustness, report.

Every stage writes flat files under ``output_dir``. The run ends with a
``manifest.json`` holding the config echo and SHA-256 digests of every input
and output, so two runs agree byte-for-byte iff their inputs and config do.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import DEFAULT_GRID, __version__
from .correlation import METHODS, build_grid, write_grid
from .corpus import filter_stats, load_corpus, write_corpus
from .errors import ComputationError, InputError, StageError
from .llm import HttpBackend, KeywordBackend, LlmClient, ReplayCache, score_corpus
from .market import ALIGNMENT_MODES, audit_leakage, build_return_grid, load_prices, write_return_grid
from .robustness import MarketMatrixSet, robustness_report
from .significance import MITIGATION_SOURCES, assess, best_combinations
from .signal import read_sentiments, signal_family, write_sentiments
from .tables import fmt, write_matrix, write_rows
from .tradeoff import tradeoff_curves, write_curve

logger = logging.getLogger(__name__)


@dataclass
class GridSpec:
    start: int = DEFAULT_GRID[0]
    stop: int = DEFAULT_GRID[-1]
    step: int = DEFAULT_GRID[1] - DEFAULT_GRID[0]

    def values(self) -> tuple[int, ...]:
        return tuple(range(self.start, self.stop + 1, self.step))


@dataclass
class BackendConfig:
    kind: str = "replay"  # replay | http | keyword
    model_id: str = "gpt-4"
    max_workers: int = 1
    attempts: int = 3
    backoff: float = 1.0
    min_interval: float = 0.0
    temperature: float = 0.0


@dataclass
class PipelineConfig:
    corpus: str | None = None
    corpus_format: str | None = None
    sentiments: str | None = None
    cache: str | None = None
    backend: BackendConfig = field(default_factory=BackendConfig)
    prices: dict[str, str] = field(default_factory=dict)
    depths: GridSpec = field(default_factory=GridSpec)
    periods: GridSpec = field(default_factory=GridSpec)
    alignment: str = "forward"
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    alpha: float = 0.01
    mitigation: str = "raw"
    s: int = 4
    horizons: int = 12
    tau: float = 0.10
    quantile_convention: str = "rank"
    paper_formula: bool = False
    zscore: bool = False
    signal_plot_depth: int = 20
    figures: bool = True
    output_dir: str = "run"
    seed: int | None = None
    base_dir: str = "."  # directory relative paths resolve against; not echoed

    def validate(self) -> None:
        if not self.depths.values() or not self.periods.values():
            raise InputError("grid must contain at least one depth and one period")
        if not 0 < self.alpha < 1 or not 0 < self.tau < 1:
            raise InputError("alpha and tau must lie in (0, 1)")
        if self.alignment not in ALIGNMENT_MODES:
            raise InputError(f"alignment must be one of {ALIGNMENT_MODES}")
        if self.mitigation not in MITIGATION_SOURCES:
            raise InputError(f"mitigation must be one of {MITIGATION_SOURCES}")
        if any(m not in METHODS for m in self.methods) or not self.methods:
            raise InputError(f"methods must be drawn from {METHODS}")
        if self.corpus is None and self.sentiments is None:
            raise InputError("config needs either 'corpus' or 'sentiments'")
        if not self.prices:
            raise InputError("config needs at least one price file under 'prices'")
        if self.backend.kind not in ("replay", "http", "keyword"):
            raise InputError(f"unknown backend kind {self.backend.kind!r}")

    def path(self, rel) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("base_dir")
        return d


def config_from_dict(raw: dict, base_dir=".") -> PipelineConfig:
    raw = dict(raw)
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(raw) - known
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    try:
        for key in ("depths", "periods"):
            if key in raw:
                raw[key] = GridSpec(**raw[key])
        if "backend" in raw:
            raw["backend"] = BackendConfig(**raw["backend"])
        cfg = PipelineConfig(**raw)
    except TypeError as exc:
        raise InputError(f"bad config: {exc}") from exc
    cfg.base_dir = str(base_dir)
    return cfg


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(raw, base_dir=path.parent)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def make_client(cfg: PipelineConfig) -> LlmClient:
    cache = ReplayCache(cfg.path(cfg.cache) if cfg.cache else None)
    b = cfg.backend
    if b.kind == "replay":
        return LlmClient(cache, None, model_id=b.model_id)
    backend = KeywordBackend() if b.kind == "keyword" else HttpBackend(b.model_id, temperature=b.temperature)
    return LlmClient(cache, backend, attempts=b.attempts, backoff=b.backoff, min_interval=b.min_interval)


class _Stages:
    """Runs named stages, wrapping failures in :class:`StageError`."""

    def __init__(self):
        self.current = None

    def __call__(self, name):
        self.current = name
        logger.info("stage %s", name)
        return self

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.current, exc) from exc
        return False


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Execute every stage and return the manifest (also written to ``manifest.json``)."""
    cfg.validate()
    out = cfg.path(cfg.output_dir)
    for sub in ("returns", "grids", "significance", "tradeoff", "robustness"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    depths, periods = cfg.depths.values(), cfg.periods.values()
    inputs = {}
    stage = _Stages()

    with stage("ingest"):
        if cfg.sentiments is not None:
            series = read_sentiments(cfg.path(cfg.sentiments))
            inputs[cfg.sentiments] = sha256_file(cfg.path(cfg.sentiments))
            write_sentiments(series.entries, out / "sentiments.csv")
            model_id = series.metadata.get("model_id", "precomputed")
        else:
            loaded = load_corpus(cfg.path(cfg.corpus), cfg.corpus_format)
            inputs[cfg.corpus] = sha256_file(cfg.path(cfg.corpus))
            write_corpus(loaded.documents, out / "corpus.jsonl")
            _dump_json(filter_stats(loaded).to_dict(), out / "ingest_report.json")

    if cfg.sentiments is None:
        with stage("score-news"):
            if cfg.cache and cfg.path(cfg.cache).exists():
                inputs[cfg.cache] = sha256_file(cfg.path(cfg.cache))
            client = make_client(cfg)
            counts = score_corpus(loaded.documents, client, cfg.backend.max_workers)
            write_sentiments(counts, out / "sentiments.csv")
            series = read_sentiments(out / "sentiments.csv")
            model_id = client.model_id

    with stage("build-signal"):
        family = signal_family(series, depths)
        dates = series.dates
        pos = {d: i for i, d in enumerate(dates)}
        wide = np.full((len(dates), len(depths)), np.nan)
        for j, d in enumerate(depths):
            cum = family[d]
            wide[[pos[t] for t in cum.dates], j] = cum.values
        write_rows(out / "signals.csv", ["date"] + [f"cum_{d}" for d in depths],
                   ([t.isoformat()] + [fmt(v) for v in row] for t, row in zip(dates, wide)))

    return_grids = {}
    audited = 0
    with stage("returns"):
        for mid, rel in sorted(cfg.prices.items()):
            prices = load_prices(cfg.path(rel), mid)
            inputs[rel] = sha256_file(cfg.path(rel))
            return_grids[mid] = build_return_grid(prices, periods, cfg.alignment)
            problems = audit_leakage(prices, return_grids[mid])
            if problems:
                raise ComputationError(f"{mid}: leakage audit failed ({len(problems)} problems): {problems[0]}")
            audited += sum(len(c.values) for c in return_grids[mid].columns.values())
            write_return_grid(return_grids[mid], out / "returns" / f"returns_{mid}.csv")

    grids = {}
    with stage("correlate"):
        for method in cfg.methods:
            for mid, rg in return_grids.items():
                g = build_grid(family, rg, method)
                grids[method, mid] = g
                write_grid(g, out / "grids" / f"{method}_{mid}_corr.csv", out / "grids" / f"{method}_{mid}_n.csv")

    with stage("significance"):
        for method in cfg.methods:
            best = {}
            for mid in return_grids:
                g = grids[method, mid]
                sig = assess(g, cfg.alpha, cfg.mitigation)
                stem = out / "significance" / f"{method}_{mid}"
                write_matrix(f"{stem}_rawp.csv", sig.raw_p, g.row_labels, g.col_labels)
                write_matrix(f"{stem}_adjp.csv", sig.adjusted_p, g.row_labels, g.col_labels)
                write_matrix(f"{stem}_mitigated.csv", sig.mitigated, g.row_labels, g.col_labels)
                best[mid] = best_combinations(g, sig)
            _dump_json({"alpha": cfg.alpha, "mitigation": cfg.mitigation, "markets": best},
                       out / "significance" / f"best_combinations_{method}.json")

    with stage("tradeoff"):
        for method in cfg.methods:
            table = {}
            for mid in return_grids:
                curve = tradeoff_curves(grids[method, mid], cfg.s, cfg.horizons)
                write_curve(curve, out / "tradeoff" / f"{method}_{mid}.csv")
                table[mid] = {str(h): d for h, d in curve.d_opt.items()}
            _dump_json({"step": cfg.s, "d_opt": table}, out / "tradeoff" / f"d_opt_{method}.json")

    if len(return_grids) >= 2:
        with stage("robustness"):
            for method in cfg.methods:
                mset = MarketMatrixSet.from_grids(grids[method, mid] for mid in return_grids)
                rep = robustness_report(mset, cfg.alpha, cfg.tau, cfg.paper_formula, cfg.zscore,
                                        cfg.quantile_convention)
                rows, cols = mset.row_labels, mset.col_labels
                stem = out / "robustness" / method
                write_matrix(f"{stem}_mean.csv", rep.mean, rows, cols)
                write_matrix(f"{stem}_std.csv", rep.std, rows, cols)
                for k, mid in enumerate(mset.market_ids):
                    write_matrix(f"{stem}_{mid}_T.csv", rep.T[k], rows, cols)
                    write_matrix(f"{stem}_{mid}_p.csv", rep.p[k], rows, cols)
                    write_matrix(f"{stem}_{mid}_Q.csv", rep.quantile_layers[k], rows, cols)
                    if rep.p_printed is not None:
                        write_matrix(f"{stem}_{mid}_p_printed.csv", rep.p_printed[k], rows, cols)
                _dump_json(rep.to_dict(), f"{stem}_report.json")

    with stage("report"):
        from .report import build_report

        build_report(out, figures=cfg.figures, alpha=cfg.alpha, signal_depth=cfg.signal_plot_depth)

    outputs = {}
    for f in sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.json"):
        outputs[f.relative_to(out).as_posix()] = sha256_file(f)
    manifest = {
        "version": __version__,
        "config": cfg.echo(),
        "alignment_mode": cfg.alignment,
        "leakage_audit": {"returns_checked": audited, "violations": 0},
        "mitigation_p": cfg.mitigation,
        "model_id": model_id,
        "inputs": inputs,
        "outputs": outputs,
    }
    _dump_json(manifest, out / "manifest.json")
    return manifest
