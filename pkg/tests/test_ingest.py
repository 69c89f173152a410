"""Extraction filters: weekdays, tag/word-count rules, language gate."""

import random
from datetime import date, datetime, timezone

import pytest

from newsbait.errors import ConfigError
from newsbait.ingest import (
    DEFAULT_TAG_SET,
    IngestConfig,
    decode_html,
    extract_candidate_texts,
    is_probably_english,
    iter_matched_texts,
    select_crawl_day,
    weekday_of,
)
from newsbait.warc import CrawlRecord

CFG = IngestConfig()


def _record(when: str) -> CrawlRecord:
    return CrawlRecord(
        target_uri="http://x.example/",
        warc_date=datetime.fromisoformat(when).replace(tzinfo=timezone.utc),
        content_type="text/html",
        payload=b"",
    )


class TestWeekdays:
    def test_known_dates(self):
        assert weekday_of(date(2016, 9, 2)) == "Friday"
        assert weekday_of(date(2020, 1, 30)) == "Thursday"
        assert weekday_of(date(2000, 1, 1)) == "Saturday"

    def test_day_count_oracle(self):
        # 2000-01-01 was a Saturday; check a spread of offsets from it.
        anchor = date(2000, 1, 1)
        names = ["Saturday", "Sunday", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday"]
        for offset in range(0, 4000, 37):
            d = date.fromordinal(anchor.toordinal() + offset)
            assert weekday_of(d) == names[offset % 7]

    def test_invalid_date_is_input_error(self):
        with pytest.raises(ValueError):
            weekday_of("2020-13-01")

    def test_select_crawl_day(self):
        assert select_crawl_day(_record("2016-09-02T10:00:00"), CFG) is True
        assert select_crawl_day(_record("2016-09-03T10:00:00"), CFG) is False
        every_day = IngestConfig(crawl_weekdays=frozenset(
            {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"}
        ))
        for day in range(1, 8):
            assert select_crawl_day(_record(f"2016-09-0{day}T10:00:00"), every_day) is True

    def test_missing_date_raises(self):
        record = CrawlRecord("http://x/", None, "text/html", b"")
        with pytest.raises(ValueError):
            select_crawl_day(record, CFG)


class TestConfig:
    def test_defaults_match_published_filters(self):
        assert CFG.tag_set == frozenset(
            {"a", "span", "h1", "h2", "h3", "h4", "h5", "yt-formatted-string"}
        )
        assert CFG.min_words == 3
        assert CFG.crawl_weekdays == frozenset({"Tuesday", "Friday"})

    def test_invariants_enforced(self):
        with pytest.raises(ConfigError):
            IngestConfig(min_words=0)
        with pytest.raises(ConfigError):
            IngestConfig(tag_set=frozenset())
        with pytest.raises(ConfigError):
            IngestConfig(english_ascii_ratio_threshold=1.5)
        with pytest.raises(ConfigError):
            IngestConfig(crawl_weekdays=frozenset({"Funday"}))

    def test_from_dict_roundtrip(self):
        cfg = IngestConfig.from_dict(
            {"tag_set": ["A", "H1"], "min_words": 2, "crawl_weekdays": ["Monday"]}
        )
        assert cfg.tag_set == frozenset({"a", "h1"})
        assert cfg.min_words == 2


class TestExtraction:
    def test_min_word_filter(self):
        html = b"<a>Only two</a><h1>Three word headline</h1>"
        assert extract_candidate_texts(html, CFG) == [("h1", "Three word headline")]

    def test_tag_filter(self):
        assert extract_candidate_texts(b"<div>Plain body paragraph text here</div>", CFG) == []

    def test_whitespace_collapsed(self):
        html = b"<a>You  Won't   Believe These Tips</a>"
        assert extract_candidate_texts(html, CFG) == [("a", "You Won't Believe These Tips")]

    def test_nested_matching_tags_both_emit_in_document_order(self):
        html = b"<h2>Breaking news <a>from the capital city</a></h2>"
        assert extract_candidate_texts(html, CFG) == [
            ("h2", "Breaking news from the capital city"),
            ("a", "from the capital city"),
        ]

    def test_script_and_style_content_excluded(self):
        html = (
            b"<h1>Real headline stays here</h1>"
            b"<script>var a = '<a>fake three words</a>';</script>"
            b"<style>a { color: red }</style>"
        )
        assert extract_candidate_texts(html, CFG) == [("h1", "Real headline stays here")]

    def test_entities_decoded(self):
        html = b"<a>Fish &amp; chips &lt;tonight&gt;</a>"
        assert extract_candidate_texts(html, CFG) == [("a", "Fish & chips <tonight>")]

    def test_unclosed_tags_still_emit(self):
        html = b"<h1>Headline without closing tag words"
        assert extract_candidate_texts(html, CFG) == [("h1", "Headline without closing tag words")]

    def test_case_insensitive_tags(self):
        html = b"<H1>Upper case tag headline</H1>"
        assert extract_candidate_texts(html, CFG) == [("h1", "Upper case tag headline")]

    def test_byte_soup_yields_empty_not_error(self):
        assert extract_candidate_texts(bytes(range(256)) * 4, CFG) == []

    def test_deterministic(self):
        html = b"<h1>Alpha beta gamma</h1><a>delta epsilon zeta</a>" * 5
        assert extract_candidate_texts(html, CFG) == extract_candidate_texts(html, CFG)

    def test_charset_sniffed_from_meta(self):
        body = "<meta charset=\"iso-8859-1\"><h1>caf\xe9 prices rise again</h1>"
        html = body.encode("iso-8859-1")
        assert extract_candidate_texts(html, CFG) == [("h1", "caf\xe9 prices rise again")]

    def test_decode_html_fallback_is_lossy_not_fatal(self):
        text = decode_html(b"\xff\xfe\xfa<h1>x</h1>")
        assert isinstance(text, str)


class TestFuzzInvariants:
    def test_randomized_html_respects_filters(self):
        rng = random.Random(20160902)
        tags = ["a", "h1", "h2", "div", "p", "span", "li", "yt-formatted-string"]
        words = ["the", "of", "sudden", "report", "shock", "10", "why", "&amp;", "x"]
        for _ in range(200):
            parts = []
            for _ in range(rng.randrange(1, 25)):
                tag = rng.choice(tags)
                text = " ".join(rng.choices(words, k=rng.randrange(0, 7)))
                if rng.random() < 0.2:
                    parts.append(f"<{tag}>{text}")  # unclosed
                else:
                    parts.append(f"<{tag}>{text}</{tag}>")
            html = "".join(parts).encode()
            for tag, text in extract_candidate_texts(html, CFG):
                assert tag in CFG.tag_set
                assert len(text.split()) >= CFG.min_words
                assert text == " ".join(text.split())
                # none of the corpus words contain brackets, so any bracket
                # in the output would be leaked markup
                assert "<" not in text and ">" not in text

    def test_no_markup_characters_leak(self):
        html = b"<h1 class='x'>Quarterly <b>profits</b> slide further</h1><a>ignore me</a>"
        for _, text in iter_matched_texts(html, CFG):
            assert "<" not in text and ">" not in text


class TestEnglishGate:
    def test_plain_english(self):
        assert is_probably_english("The markets fell sharply today", CFG) is True

    def test_cyrillic_rejected(self):
        assert is_probably_english(
            "Последние "
            "новости дня "
            "сегодня",
            CFG,
        ) is False

    def test_spanish_without_listed_stopword_rejected(self):
        assert is_probably_english("Noticias de última hora hoy", CFG) is False

    def test_latin_language_with_english_stopword_passes(self):
        # the documented permissiveness: shared alphabet plus a listed token
        assert is_probably_english("Der Plan will alles", CFG) is True

    def test_no_alpha_rejected(self):
        assert is_probably_english("1234 5678 !!!", CFG) is False
