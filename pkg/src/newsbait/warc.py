"""Streaming reader for WARC web-archive files.

Handles WARC/1.0 and WARC/1.1, plain or gzip-compressed (whole-file or one
gzip member per record, as crawl archives ship). Only ``response`` records
are surfaced; their HTTP headers are stripped so the payload is the body
alone. Crawl data is dirty, so a malformed record is reported with its byte
offset and parsing resumes at the next record boundary instead of failing
the whole file.
"""

from __future__ import annotations

import gzip
import io
import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterator

log = logging.getLogger(__name__)

_GZIP_MAGIC = b"\x1f\x8b"
_HTML_MEDIA_TYPES = frozenset({"text/html", "application/xhtml+xml"})


@dataclass(slots=True)
class CrawlRecord:
    """One archived HTTP response: target URL, capture time, body bytes."""

    target_uri: str
    warc_date: datetime | None
    content_type: str
    payload: bytes

    @property
    def media_type(self) -> str:
        return self.content_type.split(";", 1)[0].strip().lower()

    @property
    def is_html(self) -> bool:
        return self.media_type in _HTML_MEDIA_TYPES

    @property
    def charset(self) -> str | None:
        """Charset declared in the HTTP Content-Type header, if any."""
        for part in self.content_type.split(";")[1:]:
            key, _, value = part.partition("=")
            if key.strip().lower() == "charset":
                return value.strip().strip("\"'") or None
        return None


@dataclass(slots=True)
class RecordError:
    offset: int
    message: str


class _PrefixedRaw(io.RawIOBase):
    """Replays sniffed magic bytes before delegating to the real stream."""

    def __init__(self, prefix: bytes, stream):
        self._prefix = prefix
        self._stream = stream

    def readable(self) -> bool:
        return True

    def readinto(self, buffer) -> int:
        if self._prefix:
            n = min(len(buffer), len(self._prefix))
            buffer[:n] = self._prefix[:n]
            self._prefix = self._prefix[n:]
            return n
        data = self._stream.read(len(buffer))
        if not data:
            return 0
        buffer[: len(data)] = data
        return len(data)


class WarcReader:
    """Iterator of :class:`CrawlRecord` over a WARC byte stream.

    Attributes
    ----------
    errors : list of RecordError
        Malformed-record reports, each with the byte offset (within the
        decompressed stream) where the record started.
    truncated : int
        Count of records cut off by the end of the stream.
    records_read : int
        WARC records of any type successfully parsed.
    """

    def __init__(self, source):
        if isinstance(source, (bytes, bytearray, memoryview)):
            source = io.BytesIO(bytes(source))
        head = source.read(2)
        raw = io.BufferedReader(_PrefixedRaw(head, source))
        if head == _GZIP_MAGIC:
            # GzipFile transparently reads concatenated members, which covers
            # both whole-file and member-per-record compression.
            self._stream = gzip.GzipFile(fileobj=raw)
        else:
            self._stream = raw
        self._offset = 0
        self._pending_line: bytes | None = None
        self.errors: list[RecordError] = []
        self.truncated = 0
        self.records_read = 0

    # -- low-level buffered reads with offset tracking

    def _readline(self) -> bytes:
        if self._pending_line is not None:
            line, self._pending_line = self._pending_line, None
        else:
            line = self._stream.readline()
        self._offset += len(line)
        return line

    def _pushback(self, line: bytes) -> None:
        self._pending_line = line
        self._offset -= len(line)

    def _read_exact(self, n: int) -> bytes:
        chunks = []
        remaining = n
        while remaining > 0:
            chunk = self._stream.read(min(remaining, 1 << 20))
            if not chunk:
                break
            chunks.append(chunk)
            remaining -= len(chunk)
        data = b"".join(chunks)
        self._offset += len(data)
        return data

    # -- record-level parsing

    def _report(self, offset: int, message: str) -> None:
        self.errors.append(RecordError(offset, message))
        log.warning("malformed WARC record at byte %d: %s", offset, message)

    def _resync(self) -> None:
        """Skip forward to the next line that looks like a record boundary."""
        while True:
            line = self._stream.readline()
            if not line:
                return
            if line.startswith(b"WARC/"):
                self._pushback(line)
                return
            self._offset += len(line)

    def _next_raw_record(self) -> tuple[dict, bytes] | None:
        while True:
            record_offset = self._offset
            line = self._readline()
            if not line:
                return None
            if line in (b"\r\n", b"\n"):
                continue
            if not line.startswith(b"WARC/"):
                self._report(record_offset, "expected WARC version line")
                self._resync()
                continue

            headers: dict[str, str] = {}
            last_name = None
            malformed = False
            while True:
                line = self._readline()
                if not line:
                    self.truncated += 1
                    return None
                if line in (b"\r\n", b"\n"):
                    break
                if line[:1] in (b" ", b"\t") and last_name is not None:
                    headers[last_name] += " " + line.strip().decode("utf-8", "replace")
                    continue
                name, sep, value = line.partition(b":")
                if not sep:
                    self._report(record_offset, "malformed header line")
                    malformed = True
                    break
                last_name = name.strip().decode("ascii", "replace").lower()
                headers[last_name] = value.strip().decode("utf-8", "replace")
            if malformed:
                self._resync()
                continue

            try:
                content_length = int(headers["content-length"])
                if content_length < 0:
                    raise ValueError
            except (KeyError, ValueError):
                self._report(record_offset, "missing or invalid Content-Length")
                self._resync()
                continue

            payload = self._read_exact(content_length)
            if len(payload) < content_length:
                self.truncated += 1
                return None
            self.records_read += 1
            return headers, payload

    def __iter__(self) -> Iterator[CrawlRecord]:
        while True:
            raw = self._next_raw_record()
            if raw is None:
                return
            headers, payload = raw
            if headers.get("warc-type", "").lower() != "response":
                continue
            yield _build_record(headers, payload)


def _parse_warc_date(value: str) -> datetime | None:
    try:
        return datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        return None


def _build_record(headers: dict, payload: bytes) -> CrawlRecord:
    content_type = headers.get("content-type", "")
    if content_type.split(";", 1)[0].strip().lower() == "application/http":
        body, http_content_type = _strip_http_headers(payload)
    else:
        body, http_content_type = payload, content_type
    return CrawlRecord(
        target_uri=headers.get("warc-target-uri", ""),
        warc_date=_parse_warc_date(headers.get("warc-date", "")),
        content_type=http_content_type,
        payload=body,
    )


def _strip_http_headers(payload: bytes) -> tuple[bytes, str]:
    """Split an HTTP message into (body, Content-Type header value)."""
    for sep in (b"\r\n\r\n", b"\n\n"):
        end = payload.find(sep)
        if end >= 0:
            head, body = payload[:end], payload[end + len(sep):]
            content_type = ""
            for line in head.split(b"\n")[1:]:
                name, sep2, value = line.partition(b":")
                if sep2 and name.strip().lower() == b"content-type":
                    content_type = value.strip().decode("latin-1", "replace")
            return body, content_type
    # No header terminator: pass the payload through untouched.
    return payload, ""


def read_warc_stream(source) -> WarcReader:
    """Open ``source`` (path, file object, or bytes) as a stream of response records.

    The returned reader is a single-pass iterator; ``errors`` and
    ``truncated`` are populated as iteration progresses.
    """
    if isinstance(source, str):
        source = open(source, "rb")
    return WarcReader(source)
