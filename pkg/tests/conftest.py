import datetime as dt

import numpy as np
import pytest

from sentiment_lab.signal import DailySentiment, SentimentSeries


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion checked by the test")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    number, text = marker.args
    results = item.config._criteria
    ok = rep.passed and results.get(number, (True, text))[0]
    if rep.when == "call" or rep.failed:
        results[number] = (ok, text)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config._criteria
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, text = results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}")


def make_series(counts, start=dt.date(2010, 1, 4)):
    """SentimentSeries over consecutive weekdays from ``(pos, neg[, indecisive])`` tuples."""
    days = np.busday_offset(np.datetime64(start, "D"), np.arange(len(counts)), roll="forward")
    entries = [DailySentiment(d.astype(dt.date), c[0], c[1], c[2] if len(c) > 2 else 0)
               for d, c in zip(days, counts)]
    return SentimentSeries(entries)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)
