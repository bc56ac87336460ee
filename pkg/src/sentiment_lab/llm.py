"""Two-step LLM scoring of market wraps: headline extraction, then per-headline labels.

Every prompt/response pair goes through :class:`ReplayCache`, an append-only
JSON-lines file keyed by a SHA-256 digest of model id and prompt, so a scored
corpus can be replayed offline byte-for-byte.
"""

from __future__ import annotations

import datetime as dt
import enum
import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Protocol

from .corpus import NewsDocument
from .errors import BackendError, InputError, ParseError

logger = logging.getLogger(__name__)

MAX_HEADLINES = 15
MIN_HEADLINES = 10

HEADLINE_PROMPT = (
    "Assume you are an experienced asset manager. Analyze the text between {{}} and identify "
    "the predominant themes. For each theme, formulate a compelling headline that encapsulates "
    "its core message. Please arrange your responses in a list format, ensuring a line break "
    "after each headline.\n"
    "Your list should contain a total of 15 distinct headlines reflecting the respective themes "
    "and presented in the following format:\n"
    "1. Headline that encapsulates Theme 1\n"
    "2. Headline that encapsulates Theme 2\n"
    "...\n"
    "15. Headline that encapsulates Theme 15\n"
    "{{{text}}}"
)

CLASSIFICATION_PROMPT = (
    "Assume you are an experienced asset manager. Your task is to assess the impact of various "
    "economic events and trends on global equities. For each numbered statement provided below "
    "between {{}}, classify its impact as either \"positive,\" \"negative,\" or \"indecisive\".\n"
    "{{{text}}}"
)


class SentimentLabel(enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    INDECISIVE = "Indecisive"

    @property
    def is_positive(self) -> int:
        return int(self is SentimentLabel.POSITIVE)

    @property
    def is_negative(self) -> int:
        return int(self is SentimentLabel.NEGATIVE)


@dataclass(frozen=True)
class Headline:
    index: int
    text: str
    source_date: dt.date | None = None


@dataclass(frozen=True)
class LlmExchange:
    prompt_hash: str
    prompt_text: str
    response_text: str
    model_id: str
    timestamp: str


@dataclass(frozen=True)
class DailyCounts:
    date: dt.date
    n_pos: int
    n_neg: int
    n_indecisive: int


# -- prompts ---------------------------------------------------------------

def build_headline_prompt(doc: NewsDocument) -> str:
    if not doc.text.strip():
        raise InputError(f"document for {doc.date} has empty text")
    return HEADLINE_PROMPT.format(text=doc.text)


def build_classification_prompt(headlines) -> str:
    if not 1 <= len(headlines) <= MAX_HEADLINES:
        raise InputError(f"need between 1 and {MAX_HEADLINES} headlines, got {len(headlines)}")
    numbered = "\n".join(f"{k}. {h.text}" for k, h in enumerate(headlines, start=1))
    return CLASSIFICATION_PROMPT.format(text=numbered)


# -- parsers ---------------------------------------------------------------

_NUMBERED = re.compile(r"^\s*(?:[*#>-]+\s*)?\*{0,2}(\d{1,3})\.\*{0,2}\s+(.*?)\s*$")
_LABELS = {label.value.lower(): label for label in SentimentLabel}
_STRIP = " \t\"'`*_.,;:!()[]{}"


def _numbered_lines(response: str):
    for line in response.splitlines():
        m = _NUMBERED.match(line)
        if m and m.group(2).strip(_STRIP):
            yield int(m.group(1)), m.group(2)


def parse_headlines(response: str, source_date: dt.date | None = None) -> list[Headline]:
    """Extract ``"<k>. <text>"`` lines in order; anything else (preambles, blank lines) is ignored."""
    headlines = []
    seen = set()
    for k, text in _numbered_lines(response):
        if k in seen:
            raise ParseError(f"headline index {k} repeated", raw_response=response, index=k)
        seen.add(k)
        headlines.append(Headline(k, text.strip().strip("*").strip(), source_date))
    if not headlines:
        raise ParseError("no numbered headline found in response", raw_response=response)
    return headlines


def _label_token(text: str) -> SentimentLabel | None:
    # Accept "Positive", "POSITIVE.", "**negative**" and "<headline>: Negative" / "<headline> - Negative".
    # Hedged phrases such as "mildly positive" are deliberately not recognized.
    candidates = [text]
    parts = re.split(r"\s[-\u2013\u2014]\s|:\s*", text)
    if len(parts) > 1:
        candidates.append(parts[-1])
    for cand in candidates:
        label = _LABELS.get(cand.strip(_STRIP).lower())
        if label is not None:
            return label
    return None


def parse_labels(response: str, expected_count: int) -> list[SentimentLabel]:
    if expected_count < 1:
        raise ValueError("expected_count must be >= 1")
    found: dict[int, SentimentLabel] = {}
    for k, text in _numbered_lines(response):
        if not 1 <= k <= expected_count or k in found:
            continue
        label = _label_token(text)
        if label is None:
            raise ParseError(f"unrecognized label for statement {k}: {text!r}", raw_response=response, index=k)
        found[k] = label
    for k in range(1, expected_count + 1):
        if k not in found:
            raise ParseError(f"missing label for statement {k}", raw_response=response, index=k)
    return [found[k] for k in range(1, expected_count + 1)]


# -- cache and backends ----------------------------------------------------

def prompt_digest(prompt: str, model_id: str) -> str:
    return hashlib.sha256(f"{model_id}\n{prompt}".encode("utf-8")).hexdigest()


class ReplayCache:
    """Append-only JSON-lines store of :class:`LlmExchange` records.

    When a key occurs several times (a parse retry appended a fresh response)
    the latest record wins.
    """

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, LlmExchange] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        ex = LlmExchange(**json.loads(line))
                    except (json.JSONDecodeError, TypeError) as exc:
                        raise InputError(f"{self.path}:{lineno}: bad cache record") from exc
                    self._entries[ex.prompt_hash] = ex

    def __len__(self):
        return len(self._entries)

    def __contains__(self, key):
        return key in self._entries

    def get(self, key: str) -> LlmExchange | None:
        return self._entries.get(key)

    def append(self, exchange: LlmExchange) -> None:
        with self._lock:
            self._entries[exchange.prompt_hash] = exchange
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(asdict(exchange), ensure_ascii=False, sort_keys=True) + "\n")


class LlmBackend(Protocol):
    model_id: str

    def complete(self, prompt: str) -> str: ...


class TransportError(Exception):
    """Raised by backends for retryable transport failures."""


class HttpBackend:
    """OpenAI-compatible chat-completions client.

    Credentials and endpoint come from ``SENTIMENT_LAB_API_KEY``,
    ``SENTIMENT_LAB_ENDPOINT`` and ``SENTIMENT_LAB_MODEL`` unless passed explicitly.
    """

    def __init__(self, model_id=None, endpoint=None, api_key=None, temperature=0.0, timeout=120.0):
        self.model_id = model_id or os.environ.get("SENTIMENT_LAB_MODEL", "gpt-4")
        self.endpoint = endpoint or os.environ.get(
            "SENTIMENT_LAB_ENDPOINT", "https://api.openai.com/v1/chat/completions")
        self.api_key = api_key or os.environ.get("SENTIMENT_LAB_API_KEY")
        self.temperature = temperature
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        import requests

        if not self.api_key:
            raise BackendError("SENTIMENT_LAB_API_KEY is not set")
        payload = {
            "model": self.model_id,
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            resp = requests.post(self.endpoint, json=payload, timeout=self.timeout,
                                 headers={"Authorization": f"Bearer {self.api_key}"})
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        return resp.json()["choices"][0]["message"]["content"]


_POS_WORDS = ("rall", "gain", "rise", "rose", "climb", "surge", "record high", "beat", "rebound", "jump", "advance")
_NEG_WORDS = ("fall", "fell", "drop", "slump", "decline", "loss", "slid", "tumble", "plunge", "worr", "fear", "sell-off")


class KeywordBackend:
    """Deterministic offline stand-in for a chat model.

    Headlines are the leading sentences of the wrapped text; labels come from a
    small word list. Useful for fixtures and dry runs, not for research.
    """

    model_id = "keyword-stub"

    def complete(self, prompt: str) -> str:
        head, _, body = prompt.partition("\n{")
        body = body[:-1]
        if "15 distinct headlines" in head:
            body = body.partition("Theme 15\n{")[2] or body
            sentences = [s.strip() for s in re.split(r"(?<=[.!?])\s+", body) if len(s.strip()) > 20]
            lines = [f"{k}. {s.rstrip('.')}" for k, s in enumerate(sentences[:MAX_HEADLINES], start=1)]
            return "Here are the headlines:\n" + "\n".join(lines)
        out = []
        for k, text in _numbered_lines(body):
            low = text.lower()
            pos = sum(w in low for w in _POS_WORDS)
            neg = sum(w in low for w in _NEG_WORDS)
            label = "Positive" if pos > neg else "Negative" if neg > pos else "Indecisive"
            out.append(f"{k}. {label}")
        return "\n".join(out)


class LlmClient:
    """Cache-first access to a backend, with retries on transport errors.

    With ``backend=None`` the client runs in replay-only mode and a cache miss
    is a :class:`BackendError`.
    """

    def __init__(self, cache: ReplayCache, backend: LlmBackend | None = None, model_id: str | None = None,
                 attempts: int = 3, backoff: float = 1.0, min_interval: float = 0.0):
        if backend is None and model_id is None:
            raise ValueError("replay-only client needs an explicit model_id")
        self.cache = cache
        self.backend = backend
        self.model_id = model_id or backend.model_id
        self.attempts = attempts
        self.backoff = backoff
        self.min_interval = min_interval
        self.backend_calls = 0
        self._rate_lock = threading.Lock()
        self._last_call = 0.0

    def _throttle(self):
        if self.min_interval <= 0:
            return
        with self._rate_lock:
            wait = self._last_call + self.min_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_call = time.monotonic()

    def complete(self, prompt: str, refresh: bool = False) -> str:
        key = prompt_digest(prompt, self.model_id)
        if not refresh:
            hit = self.cache.get(key)
            if hit is not None:
                return hit.response_text
        if self.backend is None:
            if refresh:
                raise BackendError("replay-only mode cannot refresh a cached response")
            raise BackendError(f"cache miss for prompt {key[:12]} in replay-only mode")
        for attempt in range(1, self.attempts + 1):
            self._throttle()
            try:
                self.backend_calls += 1
                response = self.backend.complete(prompt)
                break
            except TransportError as exc:
                if attempt == self.attempts:
                    raise BackendError(f"backend failed after {attempt} attempts: {exc}") from exc
                delay = self.backoff * 2 ** (attempt - 1)
                logger.warning("transport error (%s), retrying in %.1fs", exc, delay)
                time.sleep(delay)
        stamp = dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
        self.cache.append(LlmExchange(key, prompt, response, self.model_id, stamp))
        return response


def _with_parse_retry(client: LlmClient, prompt: str, parse):
    response = client.complete(prompt)
    try:
        return parse(response)
    except ParseError as exc:
        if client.backend is None:
            raise
        logger.warning("parse failure (%s), asking the model again", exc)
        return parse(client.complete(prompt, refresh=True))


def run_two_step(doc: NewsDocument, client: LlmClient) -> tuple[list[Headline], list[SentimentLabel]]:
    """Extract headlines from ``doc`` and classify each one.

    Between 10 and 15 parsed headlines are accepted; fewer triggers one retry,
    more are truncated to the first 15.
    """
    def headlines_of(response):
        heads = parse_headlines(response, doc.date)
        if len(heads) < MIN_HEADLINES:
            raise ParseError(f"only {len(heads)} headlines for {doc.date}", raw_response=response)
        return heads

    headlines = _with_parse_retry(client, build_headline_prompt(doc), headlines_of)
    if len(headlines) > MAX_HEADLINES:
        logger.warning("%s: %d headlines returned, keeping the first %d", doc.date, len(headlines), MAX_HEADLINES)
        headlines = headlines[:MAX_HEADLINES]
    labels = _with_parse_retry(client, build_classification_prompt(headlines),
                               lambda r: parse_labels(r, len(headlines)))
    return headlines, labels


def count_labels(date: dt.date, labels) -> DailyCounts:
    pos = sum(label.is_positive for label in labels)
    neg = sum(label.is_negative for label in labels)
    return DailyCounts(date, pos, neg, len(labels) - pos - neg)


def score_corpus(documents, client: LlmClient, max_workers: int = 1) -> list[DailyCounts]:
    """Run the two-step pipeline over every document, ``max_workers`` documents in flight."""
    def one(doc):
        _, labels = run_two_step(doc, client)
        return count_labels(doc.date, labels)

    if max_workers <= 1:
        results = [one(doc) for doc in documents]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, documents))
    return sorted(results, key=lambda c: c.date)
