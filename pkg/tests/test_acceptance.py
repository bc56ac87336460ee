"""Acceptance criteria, one test (or group) per criterion.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import json
import math
import shutil
import time

import numpy as np
import pytest
from conftest import make_series
from scipy import stats
from test_correlation import naive_pearson, naive_spearman
from test_significance import bh_oracle, mp_t_cdf

from sentiment_lab import DEFAULT_GRID, MARKETS
from sentiment_lab.corpus import load_corpus
from sentiment_lab.correlation import build_grid, pearson, spearman
from sentiment_lab.distributions import student_t_cdf
from sentiment_lab.llm import KeywordBackend, LlmClient, ReplayCache, score_corpus
from sentiment_lab.market import audit_leakage, build_return_grid
from sentiment_lab.pipeline import config_from_dict, load_config, run_pipeline
from sentiment_lab.robustness import (
    MarketMatrixSet,
    elementwise_t,
    mean_matrix,
    quantile_distance,
    robustness_report,
    std_matrix,
)
from sentiment_lab.signal import cumulative_score, daily_score, signal_family
from sentiment_lab.significance import assess, bh_fdr, corr_t_test
from sentiment_lab.synthetic import (
    generate_synthetic_fixture,
    generate_text_corpus,
    write_fixture,
    write_text_corpus,
)
from sentiment_lab.tradeoff import tradeoff_curves

C1 = "score algebra: six properties exact on >= 1e5 random cases, table rows 0.57/0.00/0.45, < 5 s"
C2 = "correlation oracles: pearson/spearman vs naive oracle to 1e-12 on 1e3 pairs with ties; invariances"
C3 = "statistics oracles: Student CDF to 1e-10, BH equals O(m^2) oracle exactly on 1e3 vectors, p(0.5, 27)"
C4 = "planted signal: argmax (40,20), significant after FDR, d_opt=40 in >= 95% of 100 seeds; full run < 2 min"
C5 = "null control: FDR-significant fraction <= 2 alpha in >= 95% of seeds"
C6 = "robustness machinery: identical matrices, quantile distance examples, T = -1.118"
C7 = "determinism: replay-cache run twice gives byte-identical manifest and CSV layers"
C8 = "leakage guard: paper_stamp returns use only prices dated <= stamp across fixtures"


# -- 1 ------------------------------------------------------------------------

@pytest.mark.criterion(1, C1)
def test_score_algebra():
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    cases = 100_000
    a1, b1, a2, b2 = (rng.integers(0, 60, cases).tolist() for _ in range(4))
    c = rng.integers(1, 20, cases).tolist()
    failures = 0
    for k in range(cases):
        p, n, q, m = a1[k], b1[k], a2[k], b2[k]
        s = daily_score(p, n, exact=True)
        if s is None:
            failures += p + n != 0
            continue
        failures += not -1 <= s <= 1  # boundedness
        failures += daily_score(n, p, exact=True) != -s  # symmetry
        failures += daily_score(p + n, p + n, exact=True) != 0  # neutrality
        failures += daily_score(c[k] * p, c[k] * n, exact=True) != s  # scale invariance
        if n > 0:  # monotonicity: same total, one more positive
            failures += not daily_score(p + 1, n - 1, exact=True) > s
        if q + m > 0:  # additivity with (pos + neg) weights
            w1, w2 = p + n, q + m
            pooled = daily_score(p + q, n + m, exact=True)
            failures += pooled != (w1 * s + w2 * daily_score(q, m, exact=True)) / (w1 + w2)
    # the cumulative score is the same ratio over window sums
    series = make_series([tuple(r) for r in rng.integers(0, 8, (400, 2))])
    pos, neg = series.counts()
    for d in (1, 5, 40):
        for i in range(d - 1, len(series)):
            expected = daily_score(int(pos[i + 1 - d: i + 1].sum()), int(neg[i + 1 - d: i + 1].sum()))
            failures += cumulative_score(series, d, series.dates[i]) != expected
    elapsed = time.perf_counter() - start
    print(f"\n[1] {cases} cases, {failures} failures, {elapsed:.2f} s")
    assert failures == 0
    assert [f"{daily_score(*r):.2f}" for r in ((11, 3), (6, 6), (8, 3))] == ["0.57", "0.00", "0.45"]
    assert elapsed < 5.0


# -- 2 ------------------------------------------------------------------------

@pytest.mark.criterion(2, C2)
def test_correlation_oracles():
    rng = np.random.default_rng(2)
    worst = 0.0
    checked = 0
    for k in range(1000):
        n = int(rng.integers(3, 501))
        if k % 2:
            x = rng.integers(0, 6, n).astype(float)  # heavy ties
            y = rng.integers(0, 9, n).astype(float)
        else:
            x = rng.normal(size=n)
            y = 0.5 * x + rng.normal(size=n)
            x[: n // 4] = x[0]  # a tied block
        rp, rs = pearson(x, y), spearman(x, y)
        ep, es = naive_pearson(x.tolist(), y.tolist()), naive_spearman(x.tolist(), y.tolist())
        for got, exp in ((rp, ep), (rs, es)):
            if math.isnan(exp):
                assert math.isnan(got)
                continue
            worst = max(worst, abs(got - exp))
            checked += 1
        if not math.isnan(rp):
            assert pearson(2.5 * x + 1, 0.5 * y - 3) == pytest.approx(rp, abs=1e-12)
            assert pearson(y, x) == pytest.approx(rp, abs=1e-12)
        if not math.isnan(rs):
            assert spearman(np.exp(x / 4), y ** 3) == pytest.approx(rs, abs=1e-12)
    print(f"\n[2] {checked} coefficients, worst |diff| {worst:.2e}")
    assert worst <= 1e-12


# -- 3 ------------------------------------------------------------------------

@pytest.mark.criterion(3, C3)
def test_statistics_oracles():
    worst = 0.0
    for df in (1, 2, 3, 4, 5, 8, 10, 15, 20, 25, 30, 47, 60, 100, 120, 500):
        for q in (0.55, 0.75, 0.9, 0.95, 0.975, 0.99, 0.995, 0.999, 0.9995):
            t = float(stats.t.ppf(q, df))
            for x in (t, -t):
                ref = mp_t_cdf(x, df)
                worst = max(worst, abs(float(student_t_cdf(x, df)) - ref) / ref)
    rng = np.random.default_rng(3)
    mismatches = 0
    for _ in range(1000):
        m = int(rng.integers(1, 200))
        p = rng.uniform(0, 1, m) ** rng.uniform(1, 6)
        if rng.uniform() < 0.3:
            p = np.round(p, 2)  # ties
        mismatches += bh_fdr(p).tolist() != bh_oracle(p.tolist())
    p_ex = corr_t_test(0.5, 27)
    print(f"\n[3] CDF worst rel err {worst:.2e}; BH mismatches {mismatches}; p(0.5, 27) = {p_ex:.6f}")
    assert worst <= 1e-10
    assert mismatches == 0
    assert abs(p_ex - 0.0079) <= 1e-4


# -- 4 ------------------------------------------------------------------------

def planted_outcome(seed):
    fx = generate_synthetic_fixture(seed, planted_depth=40, planted_period=20, beta=1.0)
    family = signal_family(fx.sentiments, DEFAULT_GRID)
    ok = True
    for mid, prices in fx.prices.items():
        grid = build_grid(family, build_return_grid(prices, DEFAULT_GRID))
        i, j = np.unravel_index(np.nanargmax(grid.values), grid.values.shape)
        sig = assess(grid, 0.01)
        d_opt = tradeoff_curves(grid).d_opt[1]
        ok &= (grid.depths[i], grid.periods[j]) == (40, 20) and bool(sig.mask[i, j]) and d_opt == 40
    return ok


@pytest.mark.criterion(4, C4)
def test_planted_signal_recovery():
    hits = sum(planted_outcome(seed) for seed in range(100))
    print(f"\n[4] planted cell recovered in {hits}/100 seeds (all six markets per seed)")
    assert hits >= 95


@pytest.mark.criterion(4, C4)
def test_full_pipeline_runtime(tmp_path):
    cfg_path = write_fixture(generate_synthetic_fixture(0), tmp_path)
    start = time.perf_counter()
    run_pipeline(load_config(cfg_path))
    elapsed = time.perf_counter() - start
    best = json.loads((tmp_path / "run" / "significance" / "best_combinations_pearson.json").read_text())
    print(f"\n[4] full 49x49x6 run, both methods, with figures: {elapsed:.1f} s")
    assert all(r["max_positive"]["score"] == "S_40" for r in best["markets"].values())
    assert elapsed < 120


# -- 5 ------------------------------------------------------------------------

@pytest.mark.criterion(5, C5)
def test_null_control():
    alpha = 0.01
    fractions = []
    for seed in range(100):
        fx = generate_synthetic_fixture(1000 + seed, beta=0.0)
        family = signal_family(fx.sentiments, DEFAULT_GRID)
        sig_cells = total = 0
        for prices in fx.prices.values():
            sig = assess(build_grid(family, build_return_grid(prices, DEFAULT_GRID)), alpha)
            sig_cells += int(sig.mask.sum())
            total += int((~np.isnan(sig.raw_p)).sum())
        fractions.append(sig_cells / total)
    fractions = np.array(fractions)
    passing = int((fractions <= 2 * alpha).sum())
    print(f"\n[5] {passing}/100 seeds within 2 alpha; max fraction {fractions.max():.4f}")
    assert passing >= 95


# -- 6 ------------------------------------------------------------------------

@pytest.mark.criterion(6, C6)
def test_robustness_machinery():
    m = np.random.default_rng(6).uniform(-1, 1, (49, 49))
    mset = MarketMatrixSet(np.stack([m] * 6), MARKETS)
    np.testing.assert_array_equal(mean_matrix(mset), m)
    assert np.all(std_matrix(mset) == 0)
    rep = robustness_report(mset)
    assert rep.zero_std.all() and np.isnan(rep.T).all()
    for entry in rep.markets.values():
        assert entry["pct_p_below_alpha"] is None
        assert entry["quantile_distance"] == 0.0 and entry["pct_quantile_within_tau"] == 100.0

    A = np.array([[0.1, 0.4], [0.2, 0.3]])
    assert quantile_distance(A, A).mean == 0.0
    assert quantile_distance(A, np.array([[0.4, 0.1], [0.3, 0.2]])).mean == 0.5

    cell = MarketMatrixSet(np.array([0.1, 0.2, 0.3, 0.2, 0.1, 0.3]).reshape(6, 1, 1), MARKETS)
    T, _ = elementwise_t(cell, np.full((1, 1), 0.2), np.full((1, 1), 0.0894))
    print(f"\n[6] T = {T[0, 0, 0]:.4f}")
    assert abs(T[0, 0, 0] - (-1.118)) <= 1e-3


# -- 7 ------------------------------------------------------------------------

@pytest.mark.criterion(7, C7)
def test_replay_determinism(tmp_path):
    write_text_corpus(generate_text_corpus(7, n_days=520), tmp_path / "corpus.jsonl")
    fx = generate_synthetic_fixture(7, n_days=800, markets=("US_Tech", "US", "Japan"))
    write_fixture(fx, tmp_path)
    # populate the replay cache once with the offline backend
    docs = load_corpus(tmp_path / "corpus.jsonl").documents
    score_corpus(docs, LlmClient(ReplayCache(tmp_path / "cache.jsonl"), KeywordBackend()))

    raw = json.loads((tmp_path / "config.json").read_text())
    raw.pop("sentiments")
    raw.update(corpus="corpus.jsonl", cache="cache.jsonl", backend={"kind": "replay", "model_id": "keyword-stub"})
    runs = []
    for k in range(2):
        manifest = run_pipeline(config_from_dict(raw, tmp_path))
        keep = tmp_path / f"run{k}"
        shutil.copytree(tmp_path / "run", keep)
        shutil.rmtree(tmp_path / "run")
        runs.append((manifest, keep))
    (m0, d0), (m1, d1) = runs
    assert (d0 / "manifest.json").read_bytes() == (d1 / "manifest.json").read_bytes()
    csvs = sorted(p.relative_to(d0) for p in d0.rglob("*.csv"))
    assert len(csvs) > 50
    differing = [str(rel) for rel in csvs if (d0 / rel).read_bytes() != (d1 / rel).read_bytes()]
    print(f"\n[7] {len(csvs)} CSV layers compared, {len(differing)} differ; manifest identical")
    assert differing == []
    assert m0["model_id"] == "keyword-stub"


# -- 8 ------------------------------------------------------------------------

@pytest.mark.criterion(8, C8)
def test_leakage_guard(tmp_path):
    checked = 0
    for seed in range(5):
        fx = generate_synthetic_fixture(seed, beta=float(seed % 2))
        for prices in fx.prices.values():
            grid = build_return_grid(prices, DEFAULT_GRID, "paper_stamp")
            assert audit_leakage(prices, grid) == []
            for col in grid.columns.values():
                assert all(end <= stamp and start <= stamp for start, end, stamp in zip(col.start, col.end, col.stamps))
                checked += len(col.values)
    # the pipeline itself, run in paper_stamp mode
    cfg = load_config(write_fixture(generate_synthetic_fixture(9, n_days=600), tmp_path))
    cfg.alignment = "paper_stamp"
    cfg.figures = False
    manifest = run_pipeline(cfg)
    assert manifest["alignment_mode"] == "paper_stamp"
    assert manifest["leakage_audit"]["violations"] == 0 and manifest["leakage_audit"]["returns_checked"] > 0
    print(f"\n[8] {checked} stamped returns audited, 0 violations")
