"""SQLite-backed persistence for scored headlines.

One table holds the 8-column row schema (id, ymd, tag, pageurl, headline,
detector feature CSV, score_1, score_2). Batches insert atomically through
a single writer; daily aggregation and whole-dataset summary statistics
stream through SQL so they work at crawl scale. CSV import/export is the
language-neutral interchange path.
"""

from __future__ import annotations

import csv
import math
import sqlite3
from dataclasses import dataclass
from datetime import date

from .errors import CsvFormatError, EmptyStoreError, StoreError

_SCHEMA = """
CREATE TABLE IF NOT EXISTS scores (
    id INTEGER PRIMARY KEY,
    ymd TEXT NOT NULL,
    tag TEXT NOT NULL,
    pageurl TEXT NOT NULL,
    headline TEXT NOT NULL,
    detector TEXT NOT NULL,
    score_1 REAL NOT NULL,
    score_2 REAL NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_scores_ymd ON scores (ymd);
"""

_CSV_HEADER = ["id", "ymd", "tag", "pageurl", "headline", "detector", "score_1", "score_2"]

_SCORE_PAIR_TOL = 1e-12


@dataclass(slots=True)
class ScoreRow:
    """One scored headline; ``id`` is assigned by the store on insert."""

    ymd: date
    tag: str
    pageurl: str
    headline: str
    detector: str
    score_1: float
    score_2: float
    id: int | None = None


@dataclass(slots=True)
class DailySeries:
    """Mean clickbait score per distinct day, dates strictly increasing."""

    dates: list[date]
    means: list[float]
    counts: list[int]

    def __post_init__(self):
        if not (len(self.dates) == len(self.means) == len(self.counts)):
            raise ValueError("dates, means, counts must have equal length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(slots=True)
class SummaryStats:
    n: int
    mean: float
    median: float
    mode: float
    histogram: list[int]  # 100 equal bins over [0, 1], last bin right-closed


def _validate_row(row: ScoreRow, index: int) -> None:
    if not isinstance(row.ymd, date):
        try:
            row.ymd = date.fromisoformat(str(row.ymd))
        except ValueError:
            raise StoreError(f"row {index}: invalid date {row.ymd!r}") from None
    if not (math.isfinite(row.score_1) and 0.0 <= row.score_1 <= 1.0):
        raise StoreError(f"row {index}: score_1 {row.score_1!r} outside [0, 1]")
    if not (math.isfinite(row.score_2) and 0.0 <= row.score_2 <= 1.0):
        raise StoreError(f"row {index}: score_2 {row.score_2!r} outside [0, 1]")
    if abs(row.score_2 - (1.0 - row.score_1)) > _SCORE_PAIR_TOL:
        raise StoreError(f"row {index}: score_2 != 1 - score_1")


class ScoreStore:
    """Single-file score database (or in-memory with the default path)."""

    def __init__(self, path: str = ":memory:"):
        self.path = path
        try:
            self._conn = sqlite3.connect(path)
            self._conn.executescript(_SCHEMA)
            self._conn.commit()
        except sqlite3.Error as exc:
            raise StoreError(f"cannot open store at {path!r}: {exc}") from exc

    # -- lifecycle

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "ScoreStore":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def __len__(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM scores").fetchone()[0]

    # -- writes

    def insert_batch(self, rows) -> int:
        """Insert rows atomically; any invalid row rejects the whole batch."""
        rows = list(rows)
        for i, row in enumerate(rows):
            _validate_row(row, i)
        if not rows:
            return 0
        params = [
            (r.ymd.isoformat(), r.tag, r.pageurl, r.headline, r.detector, r.score_1, r.score_2)
            for r in rows
        ]
        try:
            with self._conn:
                self._conn.executemany(
                    "INSERT INTO scores (ymd, tag, pageurl, headline, detector, score_1, score_2)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?)",
                    params,
                )
        except sqlite3.Error as exc:
            raise StoreError(f"batch insert failed: {exc}") from exc
        return len(rows)

    def _insert_with_ids(self, rows) -> int:
        params = [
            (r.id, r.ymd.isoformat(), r.tag, r.pageurl, r.headline, r.detector,
             r.score_1, r.score_2)
            for r in rows
        ]
        try:
            with self._conn:
                self._conn.executemany(
                    "INSERT INTO scores VALUES (?, ?, ?, ?, ?, ?, ?, ?)", params
                )
        except sqlite3.Error as exc:
            raise StoreError(f"insert failed: {exc}") from exc
        return len(params)

    def update_scores(self, triples) -> int:
        """Rewrite (detector, score_1, score_2) by row id; used for re-scoring."""
        params = [(d, s1, s2, rid) for rid, d, s1, s2 in triples]
        with self._conn:
            self._conn.executemany(
                "UPDATE scores SET detector = ?, score_1 = ?, score_2 = ? WHERE id = ?",
                params,
            )
        return len(params)

    # -- reads

    def iter_rows(self):
        cur = self._conn.execute(
            "SELECT id, ymd, tag, pageurl, headline, detector, score_1, score_2"
            " FROM scores ORDER BY id"
        )
        for rid, ymd, tag, pageurl, headline, det, s1, s2 in cur:
            yield ScoreRow(
                ymd=date.fromisoformat(ymd), tag=tag, pageurl=pageurl,
                headline=headline, detector=det, score_1=s1, score_2=s2, id=rid,
            )

    def aggregate_daily(self) -> DailySeries:
        """Mean score_1 per distinct day, ascending by date."""
        rows = self._conn.execute(
            "SELECT ymd, SUM(score_1), COUNT(*) FROM scores GROUP BY ymd ORDER BY ymd"
        ).fetchall()
        if not rows:
            raise EmptyStoreError("store has no rows to aggregate")
        dates = [date.fromisoformat(ymd) for ymd, _, _ in rows]
        means = [total / count for _, total, count in rows]
        counts = [count for _, _, count in rows]
        return DailySeries(dates=dates, means=means, counts=counts)

    def summary_stats(self) -> SummaryStats:
        """Dataset-level mean/median/mode of score_1 plus a 100-bin histogram.

        Median is the lower of the middle pair for even n; mode is the most
        frequent exact score value with ties broken by the smallest value.
        """
        n, total = self._conn.execute(
            "SELECT COUNT(*), SUM(score_1) FROM scores"
        ).fetchone()
        if not n:
            raise EmptyStoreError("store has no rows to summarize")
        median = self._conn.execute(
            "SELECT score_1 FROM scores ORDER BY score_1 LIMIT 1 OFFSET ?",
            ((n - 1) // 2,),
        ).fetchone()[0]
        mode = self._conn.execute(
            "SELECT score_1 FROM scores GROUP BY score_1"
            " ORDER BY COUNT(*) DESC, score_1 ASC LIMIT 1"
        ).fetchone()[0]
        histogram = [0] * 100
        for (s1,) in self._conn.execute("SELECT score_1 FROM scores"):
            histogram[min(int(s1 * 100.0), 99)] += 1
        return SummaryStats(n=n, mean=total / n, median=median, mode=mode, histogram=histogram)

    def distinct_days(self) -> int:
        return self._conn.execute("SELECT COUNT(DISTINCT ymd) FROM scores").fetchone()[0]

    # -- CSV interchange

    def export_csv(self, path: str) -> int:
        """Write all rows as RFC 4180 CSV with a header; returns the row count."""
        count = 0
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(_CSV_HEADER)
            for row in self.iter_rows():
                writer.writerow([
                    row.id, row.ymd.isoformat(), row.tag, row.pageurl,
                    row.headline, row.detector, repr(row.score_1), repr(row.score_2),
                ])
                count += 1
        return count

    @classmethod
    def import_csv(cls, path: str, store_path: str = ":memory:") -> "ScoreStore":
        """Rebuild a store from :meth:`export_csv` output; lossless round-trip."""
        store = cls(store_path)
        rows = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != _CSV_HEADER:
                raise CsvFormatError(f"expected header {_CSV_HEADER}", line=1)
            for lineno, fields in enumerate(reader, start=2):
                if len(fields) != 8:
                    raise CsvFormatError(f"expected 8 fields, got {len(fields)}", line=lineno)
                try:
                    row = ScoreRow(
                        id=int(fields[0]),
                        ymd=date.fromisoformat(fields[1]),
                        tag=fields[2], pageurl=fields[3], headline=fields[4],
                        detector=fields[5],
                        score_1=float(fields[6]), score_2=float(fields[7]),
                    )
                except ValueError as exc:
                    raise CsvFormatError(str(exc), line=lineno) from exc
                rows.append(row)
        store._insert_with_ids(rows)
        return store
