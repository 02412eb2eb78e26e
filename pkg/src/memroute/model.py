"""Core Memento domain types and the link-format TimeMap codec.

A TimeMap lists every known snapshot (memento) of one original resource.
On the wire it is an ``application/link-format`` document: one link with
rel="original" plus one link per memento carrying a ``datetime``
parameter (RFC 1123, GMT). This module parses and emits that format and
merges TimeMaps coming from different archives.

Conventions fixed here:

* Internal datetimes are UTC instants with second precision; the wire
  format is RFC 1123 in GMT.
* Memento records are deduplicated on the exact uri_m string. Archives
  mint distinct memento URIs, so deeper normalization would risk merging
  distinct snapshots.
* Records are ordered by (datetime, uri_m as UTF-8 bytes).
* Archive attribution travels on the wire as a link-extension parameter
  ``archive="<id>"`` on memento links; unknown parameters and rels other
  than original/memento are skipped silently so real-world TimeMaps
  still ingest.

All types are immutable after construction and safe to share across
threads; parsing and merging are pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Iterable, Sequence
from urllib.parse import urlsplit

from . import kernels
from .errors import BadDatetime, MalformedLink, MissingOriginal, MixedOriginals

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_ARCHIVE_ID_RE = re.compile(r"^[A-Za-z0-9_-]+$")


def _to_epoch(dt: datetime) -> int:
    return int((dt.astimezone(timezone.utc) - _EPOCH).total_seconds())


def _from_epoch(epoch: int) -> datetime:
    return _EPOCH + timedelta(seconds=epoch)


@dataclass(frozen=True)
class ArchiveId:
    """Short archive token plus a display name.

    Identity (equality, hashing) is the token alone; the display name is
    presentation-only and may differ between a config file and a record
    parsed off the wire.
    """

    id: str
    display_name: str = field(default="", compare=False)

    def __post_init__(self):
        if not _ARCHIVE_ID_RE.match(self.id):
            raise ValueError(f"invalid archive id: {self.id!r}")
        if not self.display_name:
            object.__setattr__(self, "display_name", self.id)


@dataclass(frozen=True)
class OriginalUri:
    """An absolute URI with a hostname (the resource mementos snapshot)."""

    value: str

    def __post_init__(self):
        if not self.value:
            raise ValueError("empty original URI")
        parts = urlsplit(self.value)
        if not parts.scheme or not parts.hostname:
            raise ValueError(f"not an absolute URI with a hostname: {self.value!r}")

    @property
    def host(self) -> str:
        """Lowercased hostname component."""
        return urlsplit(self.value).hostname  # type: ignore[return-value]

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MementoRecord:
    """One snapshot: its URI, capture instant, and owning archive."""

    uri_m: str
    datetime: datetime
    archive: ArchiveId | None = None

    def __post_init__(self):
        if not self.uri_m:
            raise ValueError("empty memento URI")
        dt = self.datetime
        if dt.tzinfo is None:
            raise ValueError("memento datetime must be timezone-aware")
        dt = dt.astimezone(timezone.utc)
        if dt.microsecond:
            dt = dt.replace(microsecond=0)
        object.__setattr__(self, "datetime", dt)

    @property
    def epoch(self) -> int:
        return _to_epoch(self.datetime)

    def _key(self) -> tuple[int, bytes]:
        return (self.epoch, self.uri_m.encode("utf-8"))


@dataclass(frozen=True)
class TimeMap:
    """An original URI and its known mementos, canonically ordered.

    Construction enforces the invariants (ascending (datetime, uri_m)
    order, unique uri_m). Use :meth:`build` to normalize arbitrary
    record iterables.
    """

    original: OriginalUri
    mementos: tuple[MementoRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mementos", tuple(self.mementos))
        seen = set()
        prev_key = None
        for rec in self.mementos:
            if rec.uri_m in seen:
                raise ValueError(f"duplicate memento URI: {rec.uri_m!r}")
            seen.add(rec.uri_m)
            key = rec._key()
            if prev_key is not None and key < prev_key:
                raise ValueError("mementos are not in canonical order")
            prev_key = key

    @classmethod
    def build(cls, original: OriginalUri, records: Iterable[MementoRecord]) -> "TimeMap":
        """Normalize records (dedup by uri_m, first wins; sort) and wrap."""
        tuples = [(rec.epoch, rec.uri_m, rec) for rec in records]
        merged = kernels.merge_records([tuples])
        return cls(original, tuple(t[2] for t in merged))

    def __len__(self) -> int:
        return len(self.mementos)


def parse_link_format(body: bytes | str, archive: ArchiveId | None = None) -> TimeMap:
    """Parse a link-format TimeMap body.

    ``archive`` attributes mementos that carry no explicit ``archive``
    parameter (the fetcher knows which endpoint it queried). Raises
    MalformedLink / MissingOriginal / BadDatetime.
    """
    if isinstance(body, bytes):
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedLink(f"body is not valid UTF-8: {exc}") from None
    else:
        text = body

    links = kernels.parse_links(text)

    original_value: str | None = None
    raw_records: list[tuple[int, str, ArchiveId | None]] = []
    for target, params in links:
        first: dict[str, str] = {}
        for name, value in params:
            first.setdefault(name, value)
        rel = first.get("rel")
        if rel is None:
            continue
        rels = rel.split()
        if "original" in rels:
            if original_value is not None:
                raise MalformedLink("more than one rel=\"original\" link")
            original_value = target
        if "memento" in rels:
            dt_value = first.get("datetime")
            if dt_value is None:
                raise BadDatetime(f"memento link without datetime: <{target}>")
            try:
                epoch = kernels.parse_http_datetime(dt_value)
            except ValueError as exc:
                raise BadDatetime(str(exc)) from None
            rec_archive = archive
            token = first.get("archive")
            if token is not None:
                try:
                    rec_archive = ArchiveId(token)
                except ValueError as exc:
                    raise MalformedLink(str(exc)) from None
            raw_records.append((epoch, target, rec_archive))

    if original_value is None:
        raise MissingOriginal("no rel=\"original\" link in TimeMap body")
    try:
        original = OriginalUri(original_value)
    except ValueError as exc:
        raise MalformedLink(str(exc)) from None

    merged = kernels.merge_records([raw_records])
    mementos = tuple(
        MementoRecord(uri_m, _from_epoch(epoch), rec_archive)
        for epoch, uri_m, rec_archive in merged
    )
    return TimeMap(original, mementos)


def serialize_link_format(tm: TimeMap) -> bytes:
    """Emit a TimeMap canonically; the output re-parses to an equal TimeMap."""
    links: list[tuple[str, list[tuple[str, str]]]] = [
        (tm.original.value, [("rel", "original")])
    ]
    for rec in tm.mementos:
        params = [
            ("rel", "memento"),
            ("datetime", kernels.format_http_datetime(rec.epoch)),
        ]
        if rec.archive is not None:
            params.append(("archive", rec.archive.id))
        links.append((rec.uri_m, params))
    return kernels.format_links(links).encode("utf-8")


def merge_timemaps(maps: Sequence[TimeMap]) -> TimeMap:
    """Union TimeMaps for one original resource.

    All inputs must agree on the original after hostname normalization
    (MixedOriginals otherwise). Records are deduplicated on uri_m; the
    first occurrence in input order keeps the attribution, so the result
    is order-independent up to that tie rule.
    """
    if not maps:
        raise ValueError("merge_timemaps needs at least one TimeMap")
    host = maps[0].original.host
    for tm in maps[1:]:
        if tm.original.host != host:
            raise MixedOriginals(
                f"originals disagree after normalization: {host!r} vs {tm.original.host!r}"
            )
    record_lists = [
        [(rec.epoch, rec.uri_m, rec) for rec in tm.mementos] for tm in maps
    ]
    merged = kernels.merge_records(record_lists)
    return TimeMap(maps[0].original, tuple(t[2] for t in merged))
