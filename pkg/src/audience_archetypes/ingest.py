"""Analytics log ingestion: CSV parsing, channel grouping and matrix aggregation.

The log format is one row per (date, source, medium, video type) tally::

    date,source,medium,video_type,views,watch_seconds
    2016-06-24,t.co,referral,exiting the european union committee,100,9600
"""
from __future__ import annotations

import csv
import enum
import io
import json
import os
import re
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Sequence

import numpy as np

from .errors import BadValue, EmptyInput, InputFormatError, LabelMismatch, MissingColumn

__all__ = [
    "ChannelClass",
    "CHANNELS",
    "DEFAULT_SOCIAL_DOMAINS",
    "DEFAULT_DIRECT_SOURCES",
    "LOG_COLUMNS",
    "IngestConfig",
    "ViewRecord",
    "ViewershipMatrix",
    "parse_log",
    "classify_channel",
    "build_matrix",
    "load_config",
]

LOG_COLUMNS = ("date", "source", "medium", "video_type", "views", "watch_seconds")

DEFAULT_SOCIAL_DOMAINS = frozenset(
    {"t.co", "twitter.com", "facebook.com", "m.facebook.com", "reddit.com", "youtube.com", "lnkd.in"}
)
DEFAULT_DIRECT_SOURCES = frozenset({"(direct)"})

CONFIG_ENV_VAR = "AUDIENCE_ARCHETYPES_CONFIG"

_UINT = re.compile(r"[0-9]+")


class ChannelClass(str, enum.Enum):
    """The five acquisition groups. Declaration order is the tie-break order."""

    SEARCH = "Search"
    REFERRAL = "Referral"
    DIRECT = "Direct"
    OTHER = "Other"
    SOCIAL = "Social"

    @property
    def order(self) -> int:
        return CHANNELS.index(self)

    def __str__(self):
        return self.value


CHANNELS: tuple[ChannelClass, ...] = tuple(ChannelClass)


@dataclass(frozen=True)
class ViewRecord:
    date: date
    source: str
    medium: str
    video_type: str
    views: int
    watch_seconds: int

    def __post_init__(self):
        if self.views < 0 or self.watch_seconds < 0:
            raise BadValue("views and watch_seconds must be non-negative")
        if not self.source.strip() or not self.video_type.strip():
            raise BadValue("source and video_type must be non-empty")


@dataclass(frozen=True)
class IngestConfig:
    """Channel grouping configuration.

    ``direct_sources`` extends the literal ``(direct)`` source; synthetic logs
    use it so that many distinct direct-traffic rows survive a round trip.
    """

    social_domains: frozenset = DEFAULT_SOCIAL_DOMAINS
    direct_sources: frozenset = DEFAULT_DIRECT_SOURCES

    def to_text(self) -> str:
        return (
            f"social_domains = {','.join(sorted(self.social_domains))}\n"
            f"direct_sources = {','.join(sorted(self.direct_sources))}\n"
        )


def load_config(path=None) -> IngestConfig:
    """Read a ``key = value`` config file.

    Recognised keys are ``social_domains`` and ``direct_sources``, each a
    comma-separated list. With no path, the file named by the
    ``AUDIENCE_ARCHETYPES_CONFIG`` environment variable is used if set.
    """
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
        if not path:
            return IngestConfig()
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                key, sep, value = line.partition(":")
            key = key.strip()
            if not sep or key not in ("social_domains", "direct_sources"):
                raise BadValue(f"unrecognised config entry {line!r}", line=lineno)
            values[key] = frozenset(v.strip().lower() for v in value.split(",") if v.strip())
    return IngestConfig(**values)


def _text_stream(source) -> io.TextIOBase:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def parse_log(stream) -> list[ViewRecord]:
    """Parse an analytics CSV log into records, in file order.

    Parameters
    ----------
    stream : binary file object, bytes or str
        UTF-8 CSV with header ``date,source,medium,video_type,views,watch_seconds``.
        Extra columns are ignored.

    Raises
    ------
    MissingColumn
        If the header lacks a required column.
    BadValue
        On a negative or non-integer count, an unparseable date, or an empty
        source/video type. The exception carries the 1-based line number.
    """
    try:
        reader = csv.reader(_text_stream(stream))
        header = next(reader, None)
    except UnicodeDecodeError as exc:
        raise BadValue(f"input is not UTF-8: {exc}", line=1) from None
    if header is None:
        raise MissingColumn("empty input: no header row")
    header = [h.strip() for h in header]
    missing = [c for c in LOG_COLUMNS if c not in header]
    if missing:
        raise MissingColumn(f"header lacks required column(s): {', '.join(missing)}")
    idx = {c: header.index(c) for c in LOG_COLUMNS}

    records = []
    try:
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise BadValue(f"expected {len(header)} fields, found {len(row)}", line=line)
            cells = {c: row[i].strip() for c, i in idx.items()}
            try:
                day = date.fromisoformat(cells["date"])
            except ValueError:
                raise BadValue(f"unparseable date {cells['date']!r}", line=line) from None
            counts = {}
            for col in ("views", "watch_seconds"):
                if not _UINT.fullmatch(cells[col]):
                    raise BadValue(f"{col} must be a non-negative integer, got {cells[col]!r}", line=line)
                counts[col] = int(cells[col])
            if not cells["source"] or not cells["video_type"]:
                raise BadValue("source and video_type must be non-empty", line=line)
            records.append(
                ViewRecord(day, cells["source"], cells["medium"], cells["video_type"],
                           counts["views"], counts["watch_seconds"])
            )
    except csv.Error as exc:
        raise BadValue(str(exc), line=reader.line_num) from None
    except UnicodeDecodeError as exc:
        raise BadValue(f"input is not UTF-8: {exc}", line=reader.line_num + 1) from None
    return records


def classify_channel(source: str, medium: str, social_domains=DEFAULT_SOCIAL_DOMAINS,
                     direct_sources=DEFAULT_DIRECT_SOURCES) -> ChannelClass:
    """Map a (source, medium) pair onto one of the five channel groups.

    Rules, first match wins, case-insensitive:

    1. medium ``organic`` -> Search
    2. a direct source with medium ``(none)`` or ``(not set)`` -> Direct
    3. medium ``social``, or medium ``referral`` from a social domain -> Social
    4. medium ``referral`` -> Referral
    5. anything else, ``email`` included -> Other
    """
    source = source.strip().lower()
    medium = medium.strip().lower()
    if medium == "organic":
        return ChannelClass.SEARCH
    if medium in ("(none)", "(not set)") and source in {d.lower() for d in direct_sources}:
        return ChannelClass.DIRECT
    if medium == "social" or (medium == "referral" and source in {d.lower() for d in social_domains}):
        return ChannelClass.SOCIAL
    if medium == "referral":
        return ChannelClass.REFERRAL
    return ChannelClass.OTHER


@dataclass
class ViewershipMatrix:
    """Labeled referral-group x video-type view counts."""

    row_labels: list
    row_channels: list
    col_labels: list
    data: np.ndarray
    row_watch_seconds: np.ndarray = field(default=None)

    def __post_init__(self):
        self.row_labels = list(self.row_labels)
        self.col_labels = list(self.col_labels)
        self.row_channels = [ChannelClass(c) for c in self.row_channels]
        self.data = np.asarray(self.data)
        if self.data.ndim != 2:
            self.data = self.data.reshape(len(self.row_labels), len(self.col_labels))
        if self.row_watch_seconds is None:
            self.row_watch_seconds = np.zeros(len(self.row_labels), dtype=np.int64)
        self.row_watch_seconds = np.asarray(self.row_watch_seconds)
        g, c = self.data.shape
        if len(self.row_labels) != g or len(self.row_channels) != g or len(self.row_watch_seconds) != g:
            raise LabelMismatch(f"{g} data rows but {len(self.row_labels)} labels / "
                                f"{len(self.row_channels)} channels / {len(self.row_watch_seconds)} watch totals")
        if len(self.col_labels) != c:
            raise LabelMismatch(f"{c} data columns but {len(self.col_labels)} labels")
        if len(set(self.row_labels)) != g or len(set(self.col_labels)) != c:
            raise LabelMismatch("duplicate row or column labels")
        if np.any(self.data < 0) or np.any(self.row_watch_seconds < 0):
            raise InputFormatError("matrix entries and watch totals must be non-negative")

    @property
    def shape(self):
        return self.data.shape

    def total_views(self):
        return self.data.sum()

    def reindex(self, row_labels: Sequence, col_labels: Sequence) -> "ViewershipMatrix":
        """Reorder rows and columns to the given label order (same label sets required)."""
        if set(row_labels) != set(self.row_labels) or set(col_labels) != set(self.col_labels):
            raise LabelMismatch("reindex requires the same label sets")
        ri = {lab: i for i, lab in enumerate(self.row_labels)}
        ci = {lab: j for j, lab in enumerate(self.col_labels)}
        rows = [ri[lab] for lab in row_labels]
        cols = [ci[lab] for lab in col_labels]
        return ViewershipMatrix(
            row_labels=list(row_labels),
            row_channels=[self.row_channels[i] for i in rows],
            col_labels=list(col_labels),
            data=self.data[np.ix_(rows, cols)],
            row_watch_seconds=self.row_watch_seconds[rows],
        )

    def equals(self, other: "ViewershipMatrix", align: bool = True) -> bool:
        """Exact equality, optionally after aligning ``other`` to this label order."""
        if align:
            try:
                other = other.reindex(self.row_labels, self.col_labels)
            except LabelMismatch:
                return False
        return (
            self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
            and self.row_channels == other.row_channels
            and np.array_equal(self.data, other.data)
            and np.array_equal(self.row_watch_seconds, other.row_watch_seconds)
        )

    def to_dict(self) -> dict:
        return {
            "row_labels": self.row_labels,
            "row_channels": [c.value for c in self.row_channels],
            "col_labels": self.col_labels,
            "data": _json_matrix(self.data),
            "row_watch_seconds": _json_vector(self.row_watch_seconds),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "ViewershipMatrix":
        try:
            rows, cols = doc["row_labels"], doc["col_labels"]
            data = _array_from_json(doc["data"], (len(rows), len(cols)))
            watch = doc.get("row_watch_seconds")
            watch = None if watch is None else _array_from_json(watch, (len(rows),))
            return cls(rows, doc["row_channels"], cols, data, watch)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputFormatError):
                raise
            raise InputFormatError(f"invalid matrix document: {exc}") from None

    @classmethod
    def from_json(cls, text) -> "ViewershipMatrix":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"invalid JSON: {exc}") from None
        return cls.from_dict(doc)


def _json_vector(v):
    v = np.asarray(v)
    if np.issubdtype(v.dtype, np.integer):
        return [int(x) for x in v]
    return [float(x) for x in v]


def _json_matrix(m):
    return [_json_vector(row) for row in np.asarray(m)]


def _array_from_json(values, shape):
    arr = np.array(values)
    if arr.size == 0:
        return np.zeros(shape, dtype=np.int64)
    if arr.dtype == object or not (np.issubdtype(arr.dtype, np.integer) or np.issubdtype(arr.dtype, np.floating)):
        raise InputFormatError("matrix entries must be numbers")
    if arr.shape != tuple(shape):
        raise InputFormatError(f"expected shape {tuple(shape)}, got {arr.shape}")
    return arr


def build_matrix(records: Iterable[ViewRecord], config: IngestConfig | None = None) -> ViewershipMatrix:
    """Aggregate records into a source x video-type view-count matrix.

    Rows and columns follow first-appearance order. A source seen under
    several media takes the channel carrying most of its views (then most
    records, then declaration order), so record order never affects it.
    Watch seconds are totalled per row and kept out of the matrix itself.
    """
    config = config or IngestConfig()
    records = list(records)
    if not records:
        raise EmptyInput("no records to aggregate")
    row_index, col_index = {}, {}
    votes = []
    cells = {}
    watch = []
    for rec in records:
        i = row_index.get(rec.source)
        if i is None:
            i = row_index[rec.source] = len(row_index)
            votes.append({})
            watch.append(0)
        j = col_index.setdefault(rec.video_type, len(col_index))
        cells[i, j] = cells.get((i, j), 0) + rec.views
        watch[i] += rec.watch_seconds
        ch = classify_channel(rec.source, rec.medium, config.social_domains, config.direct_sources)
        views, count = votes[i].get(ch, (0, 0))
        votes[i][ch] = (views + rec.views, count + 1)
    channels = [max(v, key=lambda ch: (*v[ch], -ch.order)) for v in votes]
    data = np.zeros((len(row_index), len(col_index)), dtype=np.int64)
    for (i, j), v in cells.items():
        data[i, j] = v
    return ViewershipMatrix(list(row_index), channels, list(col_index), data, np.array(watch, dtype=np.int64))
