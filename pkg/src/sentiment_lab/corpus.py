"""Loading and filtering of daily market-wrap documents."""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import InputError

logger = logging.getLogger(__name__)

MIN_CHARS = 600
KEYWORDS = ("market wrap", "markets wrap")
REJECT_REASONS = ("too_short", "no_keyword", "duplicate_date")


@dataclass(frozen=True)
class NewsDocument:
    date: dt.date
    text: str
    source_id: str = ""

    def to_record(self) -> dict:
        return {"date": self.date.isoformat(), "text": self.text, "source_id": self.source_id}


@dataclass
class LoadResult:
    documents: list[NewsDocument]
    raw_count: int = 0
    rejected: Counter = field(default_factory=Counter)


@dataclass
class IngestReport:
    raw: int
    accepted: int
    too_short: int
    no_keyword: int
    duplicate_date: int
    first_date: str | None
    last_date: str | None

    def to_dict(self) -> dict:
        return asdict(self)


def rejection_reason(text: str) -> str | None:
    """Return why a document fails the acceptance filter, or None if it passes.

    Length is measured on the raw text, before any whitespace normalization.
    """
    if len(text) < MIN_CHARS:
        return "too_short"
    lowered = text.lower()
    if not any(k in lowered for k in KEYWORDS):
        return "no_keyword"
    return None


def _parse_date(value, where: str) -> dt.date:
    try:
        return dt.date.fromisoformat(str(value).strip())
    except ValueError as exc:
        raise InputError(f"{where}: unparseable date {value!r}") from exc


def _iter_jsonl(path: Path):
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: malformed JSON record ({exc.msg})") from exc
            if not isinstance(rec, dict):
                raise InputError(f"{path}:{lineno}: record is not an object")
            yield lineno, rec


def _iter_csv(path: Path):
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        # header is line 1
        for lineno, rec in enumerate(reader, start=2):
            yield lineno, rec


def filter_documents(records) -> LoadResult:
    """Apply the acceptance filter to ``(where, date, text, source_id)`` tuples."""
    result = LoadResult(documents=[])
    seen: set[dt.date] = set()
    for where, date, text, source_id in records:
        result.raw_count += 1
        reason = rejection_reason(text)
        if reason is None and date in seen:
            reason = "duplicate_date"
            logger.warning("%s: duplicate date %s, keeping the earlier record", where, date)
        if reason is not None:
            result.rejected[reason] += 1
            continue
        seen.add(date)
        result.documents.append(NewsDocument(date, text, source_id))
    result.documents.sort(key=lambda d: d.date)
    return result


def load_corpus(path, format: str | None = None) -> LoadResult:
    """Read a JSON-lines or CSV corpus and keep only accepted market wraps.

    Records need ``date`` (ISO-8601) and ``text``; ``source_id`` is optional.
    Returns the accepted documents sorted by date together with rejection counts.
    """
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format not in ("jsonl", "csv"):
        raise InputError(f"unknown corpus format {format!r}")
    if not path.is_file():
        raise InputError(f"cannot read corpus file {path}")

    rows = _iter_jsonl(path) if format == "jsonl" else _iter_csv(path)

    def records():
        for lineno, rec in rows:
            where = f"{path}:{lineno}"
            if "date" not in rec or rec.get("text") is None:
                raise InputError(f"{where}: record needs 'date' and 'text' fields")
            yield where, _parse_date(rec["date"], where), str(rec["text"]), str(rec.get("source_id") or "")

    return filter_documents(records())


def filter_stats(result: LoadResult) -> IngestReport:
    docs = result.documents
    return IngestReport(
        raw=result.raw_count,
        accepted=len(docs),
        too_short=result.rejected.get("too_short", 0),
        no_keyword=result.rejected.get("no_keyword", 0),
        duplicate_date=result.rejected.get("duplicate_date", 0),
        first_date=docs[0].date.isoformat() if docs else None,
        last_date=docs[-1].date.isoformat() if docs else None,
    )


def write_corpus(documents, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in documents:
            fh.write(json.dumps(doc.to_record(), ensure_ascii=False, sort_keys=True) + "\n")
