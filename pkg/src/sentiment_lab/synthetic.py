"""Synthetic inputs with a known answer.

Daily headline counts are drawn from a multinomial. Each market's log price is

    log P_t = log 100 + beta * G_t + u_t,   u_t ~ N(0, noise^2) i.i.d.,

where ``G_{t+p*} = G_t + S_{d*}(t)``. The log return over ``p*`` days starting
at ``t`` is therefore ``beta * S_{d*}(t) + (u_{t+p*} - u_t)``: the planted
score plus Gaussian noise. The noise is a stationary level, not a random walk,
so with ``beta = 0`` overlapping-window returns carry no persistent trend and
the per-cell t-test stays calibrated. ``noise_model="walk"`` makes ``u`` a
random walk instead, which is closer to real prices and shows how much
overlapping windows inflate significance.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import DEFAULT_GRID, MARKETS
from .market import PriceSeries, write_prices
from .signal import DailySentiment, SentimentSeries, write_sentiments

START = dt.date(2010, 1, 4)


@dataclass
class SyntheticFixture:
    sentiments: SentimentSeries
    prices: dict[str, PriceSeries]
    params: dict = field(default_factory=dict)


def trading_days(n: int, start: dt.date = START) -> tuple[dt.date, ...]:
    days = np.busday_offset(np.datetime64(start, "D"), np.arange(n), roll="forward")
    return tuple(d.astype(dt.date) for d in days)


def generate_synthetic_fixture(seed: int, planted_depth: int = 40, planted_period: int = 20, beta: float = 1.0,
                               n_days: int = 3500, noise: float = 0.01, markets=MARKETS, headlines: int = 15,
                               probs=(0.4, 0.4, 0.2), depths=DEFAULT_GRID, periods=DEFAULT_GRID,
                               noise_model: str = "level") -> SyntheticFixture:
    """Random score series plus one price series per market with the planted relation."""
    if noise_model not in ("level", "walk"):
        raise ValueError("noise_model must be 'level' or 'walk'")
    if planted_depth not in depths or planted_period not in periods:
        raise ValueError(f"planted cell ({planted_depth}, {planted_period}) is not on the grid")
    rng = np.random.default_rng(seed)
    dates = trading_days(n_days)
    counts = rng.multinomial(headlines, probs, size=n_days)
    entries = [DailySentiment(d, int(c[0]), int(c[1]), int(c[2])) for d, c in zip(dates, counts)]
    series = SentimentSeries(entries, {"source": f"synthetic seed={seed}", "model_id": "synthetic"})

    cp = np.concatenate(([0], np.cumsum(counts[:, 0])))
    cn = np.concatenate(([0], np.cumsum(counts[:, 1])))
    wp = cp[planted_depth:] - cp[:-planted_depth]
    wn = cn[planted_depth:] - cn[:-planted_depth]
    planted = np.zeros(n_days)
    tot = wp + wn
    planted[planted_depth - 1:] = np.divide(wp - wn, tot, out=np.zeros(tot.shape), where=tot > 0)

    G = np.zeros(n_days)
    p = planted_period
    for t in range(p, n_days):
        G[t] = G[t - p] + planted[t - p]

    prices = {}
    for mid in markets:
        u = rng.normal(0.0, noise, n_days)
        if noise_model == "walk":
            u = np.cumsum(u)
        prices[mid] = PriceSeries(mid, dates, 100.0 * np.exp(beta * G + u))
    params = dict(seed=seed, planted_depth=planted_depth, planted_period=planted_period, beta=beta,
                  n_days=n_days, noise=noise, noise_model=noise_model, markets=list(markets))
    return SyntheticFixture(series, prices, params)


def write_fixture(fixture: SyntheticFixture, out_dir, depths=DEFAULT_GRID, periods=DEFAULT_GRID) -> Path:
    """Write sentiments, prices and a ready-to-run pipeline config; returns the config path."""
    out = Path(out_dir)
    (out / "prices").mkdir(parents=True, exist_ok=True)
    write_sentiments(fixture.sentiments.entries, out / "sentiments.csv")
    for mid, series in fixture.prices.items():
        write_prices(series, out / "prices" / f"{mid}.csv")
    config = {
        "sentiments": "sentiments.csv",
        "prices": {mid: f"prices/{mid}.csv" for mid in fixture.prices},
        "depths": _grid_spec(depths),
        "periods": _grid_spec(periods),
        "output_dir": "run",
        "seed": fixture.params.get("seed"),
    }
    path = out / "config.json"
    path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out / "fixture.json").write_text(json.dumps(fixture.params, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _grid_spec(grid):
    grid = list(grid)
    step = grid[1] - grid[0] if len(grid) > 1 else 1
    if grid != list(range(grid[0], grid[-1] + 1, step)):
        raise ValueError("grid is not evenly spaced")
    return {"start": grid[0], "stop": grid[-1], "step": step}


_UP = ["stocks rallied as {topic} beat expectations", "shares climbed after {topic} improved",
       "equities gained on upbeat {topic}", "indexes rose to a record high on {topic}"]
_DOWN = ["stocks fell as {topic} disappointed", "shares tumbled after {topic} worsened",
         "equities slid on worries over {topic}", "indexes dropped amid fear about {topic}"]
_FLAT = ["investors weighed {topic} ahead of the weekend", "traders awaited further news on {topic}",
         "the outlook for {topic} remained unclear to analysts"]
_TOPICS = ["factory orders", "central bank guidance", "oil supply", "bank earnings", "consumer spending",
           "chip demand", "bond yields", "housing starts", "trade talks", "jobless claims", "retail sales",
           "inflation data", "currency moves", "tech earnings", "credit spreads", "commodity prices"]


def generate_text_corpus(seed: int, n_days: int = 300, start: dt.date = START) -> list[dict]:
    """Market-wrap-like documents (JSON-lines records) with at least 12 sentences and 640 characters each."""
    rng = np.random.default_rng(seed)
    records = []
    for i, day in enumerate(trading_days(n_days, start)):
        mood = rng.uniform(0.2, 0.8)
        sentences = []
        target = int(rng.integers(12, 16))
        while len(sentences) < target or sum(len(x) + 1 for x in sentences) < 640:
            topic = _TOPICS[int(rng.integers(len(_TOPICS)))]
            u = rng.uniform()
            pool = _UP if u < mood * 0.8 else _DOWN if u < 0.8 else _FLAT
            text = pool[int(rng.integers(len(pool)))].format(topic=topic)
            sentences.append(text[0].upper() + text[1:] + ".")
        body = f"Markets Wrap for {day.isoformat()}. " + " ".join(sentences)
        records.append({"date": day.isoformat(), "text": body, "source_id": f"synthetic-{seed}-{i}"})
    return records


def write_text_corpus(records, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
