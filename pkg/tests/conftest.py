"""Shared fixtures: hand-built WARC files and synthetic stores."""

from __future__ import annotations

import gzip
import io
from datetime import date, timedelta

import numpy as np
import pytest

from newsbait.store import ScoreRow, ScoreStore


def http_response(body: bytes, content_type: str = "text/html; charset=utf-8") -> bytes:
    head = (
        b"HTTP/1.1 200 OK\r\n"
        b"Content-Type: " + content_type.encode() + b"\r\n"
        b"Content-Length: " + str(len(body)).encode() + b"\r\n"
        b"\r\n"
    )
    return head + body


def warc_record(
    rec_type: str,
    payload: bytes,
    uri: str | None = None,
    warc_date: str = "2016-09-02T08:00:00Z",
    content_type: str = "application/http; msgtype=response",
) -> bytes:
    headers = [
        b"WARC/1.0",
        b"WARC-Type: " + rec_type.encode(),
        b"WARC-Date: " + warc_date.encode(),
        b"WARC-Record-ID: <urn:uuid:00000000-0000-0000-0000-000000000000>",
    ]
    if uri is not None:
        headers.append(b"WARC-Target-URI: " + uri.encode())
    headers.append(b"Content-Type: " + content_type.encode())
    headers.append(b"Content-Length: " + str(len(payload)).encode())
    return b"\r\n".join(headers) + b"\r\n\r\n" + payload + b"\r\n\r\n"


def html_response_record(html: str, uri: str, warc_date: str) -> bytes:
    return warc_record(
        "response",
        http_response(html.encode("utf-8")),
        uri=uri,
        warc_date=warc_date,
    )


def gzip_members(records: list[bytes]) -> bytes:
    """One gzip member per record, as Common Crawl ships."""
    out = io.BytesIO()
    for rec in records:
        out.write(gzip.compress(rec))
    return out.getvalue()


# The end-to-end fixture: 6 HTML pages on crawl days holding exactly 14
# texts that pass the default tag/word-count/language filters, plus decoy
# records (warcinfo, request, an image response) and in-page decoys
# (short anchors, div text, script content, non-English texts).

FIXTURE_PAGES = [
    (
        "http://news1.example/a",
        "2016-09-02T06:00:00Z",  # Friday
        """<html><head><title>t</title></head><body>
        <h1>Markets fall sharply on global fears</h1>
        <a href="/more">Read more</a>
        <a href="/tips">You won't believe these seven tips</a>
        <div>Some body text that is long enough</div>
        </body></html>""",
        2,
    ),
    (
        "http://news1.example/b",
        "2016-09-02T07:00:00Z",
        """<html><body>
        <h2>Election race tightens in the key states</h2>
        <span>Weather update for the weekend ahead</span>
        <a>Последние новости дня сегодня</a>
        <script>var x = "<a>Three word headline</a>";</script>
        </body></html>""",
        2,
    ),
    (
        "http://news2.example/",
        "2016-09-06T06:00:00Z",  # Tuesday
        """<html><body>
        <h2>Breaking news <a>from the capital city</a></h2>
        <h3>Top 10 things you must see</h3>
        <a href="#">Click</a>
        </body></html>""",
        3,
    ),
    (
        "http://news2.example/b",
        "2016-09-06T07:00:00Z",
        """<html><body>
        <h4>Officials confirm the new budget plan</h4>
        <h5>A quiet day on the trading floor</h5>
        <yt-formatted-string>This video will make you laugh</yt-formatted-string>
        </body></html>""",
        3,
    ),
    (
        "http://news3.example/",
        "2016-09-09T06:00:00Z",  # Friday
        """<html><body>
        <a>Noticias de última hora hoy</a>
        <a>The committee meets again on Monday</a>
        <h1>New   survey shows    what voters think</h1>
        </body></html>""",
        2,
    ),
    (
        "http://news3.example/b",
        "2016-09-09T07:00:00Z",
        """<html><body>
        <h2>Scientists publish a new climate study</h2>
        <a>How to save money this winter</a>
        </body></html>""",
        2,
    ),
]

FIXTURE_QUALIFYING = sum(n for *_, n in FIXTURE_PAGES)  # 14
FIXTURE_DAY_COUNTS = {"2016-09-02": 4, "2016-09-06": 6, "2016-09-09": 4}


def build_fixture_warc() -> bytes:
    records = [
        warc_record("warcinfo", b"software: fixture\r\n", content_type="application/warc-fields"),
        warc_record(
            "request",
            b"GET / HTTP/1.1\r\nHost: news1.example\r\n\r\n",
            uri="http://news1.example/a",
            content_type="application/http; msgtype=request",
        ),
    ]
    for uri, when, html, _ in FIXTURE_PAGES:
        records.append(html_response_record(html, uri, when))
    records.append(
        warc_record(
            "response",
            http_response(b"\x89PNG\r\n\x1a\n000", content_type="image/png"),
            uri="http://news1.example/logo.png",
            warc_date="2016-09-02T06:30:00Z",
        )
    )
    return b"".join(records)


@pytest.fixture
def fixture_warc_path(tmp_path):
    path = tmp_path / "fixture.warc"
    path.write_bytes(build_fixture_warc())
    return path


def make_daily_store(path: str, values, start: date = date(2018, 1, 1)) -> ScoreStore:
    """Store with one row per consecutive day, score_1 = values[i]."""
    store = ScoreStore(path)
    rows = []
    for i, v in enumerate(values):
        v = float(v)
        rows.append(ScoreRow(
            ymd=start + timedelta(days=i),
            tag="a",
            pageurl=f"http://example.org/{i}",
            headline=f"synthetic headline number {i}",
            detector="0.0",
            score_1=v,
            score_2=1.0 - v,
        ))
    store.insert_batch(rows)
    return store


def simulate_ar1(rng: np.random.Generator, n: int, phi: float, sigma: float) -> np.ndarray:
    e = np.empty(n)
    e[0] = rng.normal(0.0, sigma / np.sqrt(1.0 - phi * phi))
    innov = rng.normal(0.0, sigma, n)
    for t in range(1, n):
        e[t] = phi * e[t - 1] + innov[t]
    return e
