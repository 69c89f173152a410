"""Candidate headline extraction from crawled news pages.

Pages arrive as raw response bodies (see :mod:`newsbait.warc`). A page
yields one candidate per element whose tag is in the configured set, with
whitespace-normalized text, subject to a minimum word count and a fast
Latin-script language gate. Real crawl HTML is routinely broken, so the
extractor is built on the stdlib's tolerant parser and never raises on
input bytes.
"""

from __future__ import annotations

import codecs
import json
import re
from dataclasses import dataclass, field
from datetime import date, datetime
from html.parser import HTMLParser

from .errors import ConfigError
from .stopwords import ENGLISH_STOPWORDS, normalize_token
from .warc import CrawlRecord

WEEKDAY_NAMES = (
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday",
)

DEFAULT_TAG_SET = frozenset(
    {"a", "span", "h1", "h2", "h3", "h4", "h5", "yt-formatted-string"}
)
DEFAULT_CRAWL_WEEKDAYS = frozenset({"Tuesday", "Friday"})
DEFAULT_MIN_WORDS = 3
DEFAULT_ASCII_RATIO = 0.9


@dataclass(frozen=True)
class IngestConfig:
    """Filter settings for candidate extraction."""

    tag_set: frozenset[str] = DEFAULT_TAG_SET
    min_words: int = DEFAULT_MIN_WORDS
    crawl_weekdays: frozenset[str] = DEFAULT_CRAWL_WEEKDAYS
    english_filter_enabled: bool = True
    english_ascii_ratio_threshold: float = DEFAULT_ASCII_RATIO

    def __post_init__(self):
        object.__setattr__(self, "tag_set", frozenset(t.lower() for t in self.tag_set))
        object.__setattr__(self, "crawl_weekdays", frozenset(self.crawl_weekdays))
        if not self.tag_set:
            raise ConfigError("tag_set must be non-empty")
        if self.min_words < 1:
            raise ConfigError("min_words must be >= 1")
        if not 0.0 <= self.english_ascii_ratio_threshold <= 1.0:
            raise ConfigError("english_ascii_ratio_threshold must be in [0, 1]")
        bad = self.crawl_weekdays - set(WEEKDAY_NAMES)
        if bad:
            raise ConfigError(f"unknown weekday names: {sorted(bad)}")

    @classmethod
    def from_dict(cls, raw: dict) -> "IngestConfig":
        kwargs = {}
        if "tag_set" in raw:
            kwargs["tag_set"] = frozenset(raw["tag_set"])
        if "min_words" in raw:
            kwargs["min_words"] = int(raw["min_words"])
        if "crawl_weekdays" in raw:
            kwargs["crawl_weekdays"] = frozenset(raw["crawl_weekdays"])
        if "english_filter_enabled" in raw:
            kwargs["english_filter_enabled"] = bool(raw["english_filter_enabled"])
        if "english_ascii_ratio_threshold" in raw:
            kwargs["english_ascii_ratio_threshold"] = float(
                raw["english_ascii_ratio_threshold"]
            )
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str) -> "IngestConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(slots=True)
class ExtractedHeadline:
    """One candidate text with its capture date, tag, and page URL."""

    ymd: date
    tag: str
    page_url: str
    text: str


def weekday_of(value: date | str) -> str:
    """Civil weekday name of a proleptic Gregorian date.

    Accepts a ``date`` or an ISO ``YYYY-MM-DD`` string; invalid dates raise
    ``ValueError``.
    """
    if isinstance(value, str):
        value = date.fromisoformat(value)
    elif isinstance(value, datetime):
        value = value.date()
    return WEEKDAY_NAMES[value.weekday()]


def select_crawl_day(record: CrawlRecord, config: IngestConfig) -> bool:
    """True iff the record was captured on a configured crawl weekday."""
    if record.warc_date is None:
        raise ValueError(f"record {record.target_uri!r} has no valid WARC-Date")
    return weekday_of(record.warc_date.date()) in config.crawl_weekdays


# -- encoding

_META_CHARSET_RE = re.compile(rb"charset\s*=\s*[\"']?([A-Za-z0-9_.:\-]+)", re.IGNORECASE)


def decode_html(payload: bytes, declared_charset: str | None = None) -> str:
    """Decode page bytes using BOM, declared charset, or an in-page sniff.

    Falls back to UTF-8 with replacement; decoding never fails.
    """
    if payload.startswith(codecs.BOM_UTF8):
        return payload.decode("utf-8-sig", "replace")
    if payload.startswith((codecs.BOM_UTF16_LE, codecs.BOM_UTF16_BE)):
        return payload.decode("utf-16", "replace")
    for name in (declared_charset, _sniff_meta_charset(payload)):
        if not name:
            continue
        try:
            codec = codecs.lookup(name)
        except (LookupError, TypeError):
            continue
        return payload.decode(codec.name, "replace")
    return payload.decode("utf-8", "replace")


def _sniff_meta_charset(payload: bytes) -> str | None:
    match = _META_CHARSET_RE.search(payload[:2048])
    return match.group(1).decode("ascii", "replace") if match else None


# -- tag text collection

_SKIP_CONTENT_TAGS = frozenset({"script", "style"})


class _TagTextCollector(HTMLParser):
    """Accumulates descendant text per matching element, in start-tag order."""

    def __init__(self, tag_set: frozenset[str]):
        super().__init__(convert_charrefs=True)
        self._tag_set = tag_set
        self._open: list[list] = []  # [tag, ordinal, parts]
        self._ordinal = 0
        self._skipping = 0
        self.finished: list[tuple[int, str, str]] = []

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_CONTENT_TAGS:
            self._skipping += 1
            return
        if tag in self._tag_set:
            self._open.append([tag, self._ordinal, []])
            self._ordinal += 1

    def handle_endtag(self, tag):
        if tag in _SKIP_CONTENT_TAGS:
            self._skipping = max(0, self._skipping - 1)
            return
        if tag not in self._tag_set:
            return
        for i in range(len(self._open) - 1, -1, -1):
            if self._open[i][0] == tag:
                self._finish(self._open.pop(i))
                return

    def handle_data(self, data):
        if self._skipping or not self._open:
            return
        for entry in self._open:
            entry[2].append(data)

    def _finish(self, entry) -> None:
        tag, ordinal, parts = entry
        text = " ".join("".join(parts).split())
        self.finished.append((ordinal, tag, text))

    def flush(self) -> list[tuple[str, str]]:
        while self._open:
            self._finish(self._open.pop())
        self.finished.sort()
        return [(tag, text) for _, tag, text in self.finished]


def iter_matched_texts(
    html: bytes | str,
    config: IngestConfig,
    declared_charset: str | None = None,
) -> list[tuple[str, str]]:
    """All (tag, text) pairs for matching elements, before the word filter.

    Text is whitespace-normalized and may be empty. Unparseable byte soup
    yields an empty list rather than an error.
    """
    if isinstance(html, bytes):
        html = decode_html(html, declared_charset)
    collector = _TagTextCollector(config.tag_set)
    try:
        collector.feed(html)
        collector.close()
    except Exception:
        # Tolerant by contract: keep whatever was collected before the hiccup.
        pass
    return collector.flush()


def extract_candidate_texts(
    html: bytes | str,
    config: IngestConfig,
    declared_charset: str | None = None,
) -> list[tuple[str, str]]:
    """(tag, text) pairs passing the tag and minimum-word filters, in document order."""
    return [
        (tag, text)
        for tag, text in iter_matched_texts(html, config, declared_charset)
        if len(text.split()) >= config.min_words
    ]


def is_probably_english(text: str, config: IngestConfig) -> bool:
    """Fast Latin-script heuristic: mostly basic-Latin letters plus one stopword.

    Deliberately permissive; languages sharing the Latin alphabet can pass
    when they contain a token from the 50-word English list.
    """
    alpha = 0
    latin = 0
    for ch in text:
        if ch.isalpha():
            alpha += 1
            if ch.isascii():
                latin += 1
    ratio = latin / alpha if alpha else 0.0
    if ratio < config.english_ascii_ratio_threshold:
        return False
    return any(normalize_token(tok) in ENGLISH_STOPWORDS for tok in text.split())


def headlines_from_record(
    record: CrawlRecord, config: IngestConfig
) -> list[ExtractedHeadline]:
    """Extraction pipeline for one HTML response record (language gate included)."""
    if record.warc_date is None:
        return []
    ymd = record.warc_date.date()
    out = []
    for tag, text in extract_candidate_texts(record.payload, config, record.charset):
        if config.english_filter_enabled and not is_probably_english(text, config):
            continue
        out.append(ExtractedHeadline(ymd=ymd, tag=tag, page_url=record.target_uri, text=text))
    return out
