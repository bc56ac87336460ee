import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sentiment_lab.corpus import (
    MIN_CHARS,
    filter_documents,
    filter_stats,
    load_corpus,
    rejection_reason,
    write_corpus,
)
from sentiment_lab.errors import InputError

WRAP = "Markets Wrap: " + "stocks moved on the day. " * 40


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


def test_long_wrap_accepted(tmp_path):
    text = ("Global Markets Wrap " + "x" * 900)[:900]
    res = load_corpus(write_jsonl(tmp_path / "c.jsonl", [{"date": "2020-01-02", "text": text}]))
    assert len(res.documents) == 1
    assert res.documents[0].text == text


def test_short_text_rejected(tmp_path):
    res = load_corpus(write_jsonl(tmp_path / "c.jsonl", [{"date": "2020-01-02", "text": "market wrap " + "y" * 188}]))
    assert res.documents == []
    assert res.rejected["too_short"] == 1


def test_duplicate_date_keeps_first(tmp_path, caplog):
    recs = [{"date": "2020-01-02", "text": WRAP, "source_id": "a"},
            {"date": "2020-01-02", "text": WRAP, "source_id": "b"}]
    res = load_corpus(write_jsonl(tmp_path / "c.jsonl", recs))
    assert [d.source_id for d in res.documents] == ["a"]
    assert res.rejected["duplicate_date"] == 1
    assert "duplicate date" in caplog.text


def test_keyword_rules():
    base = "z" * MIN_CHARS
    assert rejection_reason("MARKET WRAP " + base) is None
    assert rejection_reason("the markets wrap up " + base) is None
    assert rejection_reason("market summary " + base) == "no_keyword"
    assert rejection_reason("market wrap" + "z" * (MIN_CHARS - 12)) == "too_short"


def test_length_counts_raw_whitespace():
    text = "market wrap" + " " * (MIN_CHARS - 11)
    assert len(text) == MIN_CHARS
    assert rejection_reason(text) is None


def test_output_sorted(tmp_path):
    recs = [{"date": d, "text": WRAP} for d in ("2020-01-06", "2020-01-02", "2020-01-03")]
    res = load_corpus(write_jsonl(tmp_path / "c.jsonl", recs))
    assert [d.date.isoformat() for d in res.documents] == ["2020-01-02", "2020-01-03", "2020-01-06"]


def test_csv_format(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text('date,text,source_id\n2020-01-02,"' + WRAP + '",s1\n', encoding="utf-8")
    res = load_corpus(p)
    assert res.documents[0].source_id == "s1"


def test_malformed_record_line_number(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text(json.dumps({"date": "2020-01-02", "text": WRAP}) + "\n{not json\n", encoding="utf-8")
    with pytest.raises(InputError, match=r"c\.jsonl:2"):
        load_corpus(p)


def test_bad_date_and_missing_fields(tmp_path):
    with pytest.raises(InputError, match=":1: unparseable date"):
        load_corpus(write_jsonl(tmp_path / "a.jsonl", [{"date": "Jan 2", "text": WRAP}]))
    with pytest.raises(InputError, match="needs 'date' and 'text'"):
        load_corpus(write_jsonl(tmp_path / "b.jsonl", [{"date": "2020-01-02"}]))


def test_unreadable_file(tmp_path):
    with pytest.raises(InputError, match="cannot read"):
        load_corpus(tmp_path / "missing.jsonl")


def test_filter_stats_counts(tmp_path):
    recs = [{"date": f"2020-01-{d:02d}", "text": WRAP} for d in range(1, 11)]
    recs.append({"date": "2020-02-01", "text": "short"})
    recs.append({"date": "2020-02-02", "text": "no keyword here " * 50})
    rep = filter_stats(load_corpus(write_jsonl(tmp_path / "c.jsonl", recs))).to_dict()
    assert rep == {"raw": 12, "accepted": 10, "too_short": 1, "no_keyword": 1, "duplicate_date": 0,
                   "first_date": "2020-01-01", "last_date": "2020-01-10"}


def test_filter_stats_empty(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text("", encoding="utf-8")
    rep = filter_stats(load_corpus(p))
    assert (rep.raw, rep.accepted, rep.too_short, rep.no_keyword, rep.duplicate_date) == (0, 0, 0, 0, 0)
    assert rep.first_date is None


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 900), st.booleans()), max_size=30))
def test_filter_idempotent_and_increasing(specs):
    import datetime as dt

    records = []
    for k, (day, length, keyword) in enumerate(specs):
        text = ("market wrap " if keyword else "") + "w" * length
        records.append((f"rec{k}", dt.date(2021, 1, 1) + dt.timedelta(days=day), text, f"s{k}"))
    once = filter_documents(records).documents
    twice = filter_documents((d.source_id, d.date, d.text, d.source_id) for d in once).documents
    assert once == twice
    assert all(a.date < b.date for a, b in zip(once, once[1:]))


def test_write_roundtrip(tmp_path):
    recs = [{"date": "2020-01-02", "text": WRAP, "source_id": "x"}]
    docs = load_corpus(write_jsonl(tmp_path / "c.jsonl", recs)).documents
    write_corpus(docs, tmp_path / "out.jsonl")
    assert load_corpus(tmp_path / "out.jsonl").documents == docs
