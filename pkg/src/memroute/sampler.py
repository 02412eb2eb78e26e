"""URI sample construction.

Builds the host-level URI samples the profiler consumes, from three
kinds of input: directory dumps (random / per-TLD / per-language),
archive fulltext-search result files, and access logs of memento or
TimeMap requests. Every sample holds unique, hostified entries and is a
pure function of its inputs and the RNG seed: hosts are deduplicated and
sorted before any draw, so input order never matters, and each group
(TLD, language) draws from its own namespaced RNG stream.
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Literal, Sequence

from .errors import (
    EmptyUniverse,
    MalformedRow,
    NoExtractableRequests,
    NoHost,
    UnknownTld,
)
from .model import ArchiveId, OriginalUri
from .uri_tools import SuffixSet, extract_tld, hostify

logger = logging.getLogger(__name__)

SourceKind = Literal[
    "directory_random",
    "directory_tld",
    "directory_language",
    "fulltext",
    "wayback_log",
    "aggregator_log",
]

_SOURCE_KINDS = {
    "directory_random", "directory_tld", "directory_language",
    "fulltext", "wayback_log", "aggregator_log",
}


@dataclass(frozen=True)
class SampleEntry:
    """One sampled host with optional TLD/language labels and provenance."""

    uri: OriginalUri
    tld: str | None = None
    language: str | None = None
    source_archive: ArchiveId | None = None


@dataclass(frozen=True)
class UriSample:
    """A named set of unique, hostified entries.

    Uniqueness is keyed on (host, source archive): plain samples have no
    source archive, so their hostnames are globally unique, while a
    fulltext sample keeps one entry per source archive slice (the same
    host may be returned by several archives' search interfaces).
    """

    name: str
    source_kind: SourceKind
    entries: tuple[SampleEntry, ...]

    def __post_init__(self):
        if self.source_kind not in _SOURCE_KINDS:
            raise ValueError(f"unknown source kind: {self.source_kind!r}")
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for entry in self.entries:
            host = entry.uri.host
            if entry.uri.value != f"http://{host}":
                raise ValueError(f"entry is not hostified: {entry.uri.value!r}")
            key = (host, entry.source_archive.id if entry.source_archive else None)
            if key in seen:
                raise ValueError(f"duplicate host in sample: {host!r}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.entries)

    def hosts(self) -> set[str]:
        return {entry.uri.host for entry in self.entries}


@dataclass(frozen=True)
class SampleSpec:
    """Sampling parameters. The TLD fraction is kept as an exact rational
    so "2% of H" never picks up float noise."""

    rng_seed: int
    tld_fraction: Fraction = Fraction(2, 100)
    tld_floor: int = 100
    per_language_count: int = 100

    def __post_init__(self):
        fraction = self.tld_fraction
        if not isinstance(fraction, Fraction):
            fraction = Fraction(str(fraction))
            object.__setattr__(self, "tld_fraction", fraction)
        if not 0 < fraction <= 1:
            raise ValueError(f"tld_fraction out of range: {fraction}")
        if self.tld_floor < 1:
            raise ValueError(f"tld_floor must be >= 1: {self.tld_floor}")
        if self.per_language_count < 1:
            raise ValueError(f"per_language_count must be >= 1: {self.per_language_count}")


def controlled_tld_count(available: int, spec: SampleSpec) -> int:
    """Hosts to select for a TLD with ``available`` unique hosts.

    max(ceil(fraction * available), floor), capped at availability.
    """
    fraction = spec.tld_fraction
    share = -((-fraction.numerator * available) // fraction.denominator)
    return min(available, max(share, spec.tld_floor))


def _rng(seed: int, *scope: object) -> random.Random:
    tag = ":".join(str(part) for part in scope)
    return random.Random(f"{seed}:{tag}")


def _unique_hosts(universe: Iterable[OriginalUri | str]) -> list[OriginalUri]:
    """Hostify, dedup, and sort a raw universe; rejects nothing fatal."""
    by_host: dict[str, OriginalUri] = {}
    skipped = 0
    for raw in universe:
        try:
            uri = hostify(raw)
        except NoHost:
            skipped += 1
            continue
        by_host.setdefault(uri.host, uri)
    if skipped:
        logger.warning("skipped %d universe entries without a usable hostname", skipped)
    return [by_host[h] for h in sorted(by_host)]


def sample_random(
    universe: Iterable[OriginalUri | str],
    n: int,
    spec: SampleSpec,
    name: str = "random",
) -> UriSample:
    """Uniform sample of min(n, unique hosts) from the universe."""
    hosts = _unique_hosts(universe)
    if not hosts:
        raise EmptyUniverse("no usable hosts in universe")
    rng = _rng(spec.rng_seed, "random")
    chosen = rng.sample(hosts, min(n, len(hosts)))
    return UriSample(name, "directory_random", tuple(SampleEntry(u) for u in chosen))


def sample_controlled_tld(
    universe: Iterable[OriginalUri | str],
    tlds: Sequence[str],
    spec: SampleSpec,
    name: str = "tld",
    suffixes: SuffixSet | None = None,
    strict: bool = False,
) -> UriSample:
    """Per-TLD controlled sample: the greater of the fraction share and the
    floor, capped at availability, drawn uniformly per TLD."""
    if not tlds:
        raise ValueError("no TLDs requested")
    hosts = _unique_hosts(universe)
    if not hosts:
        raise EmptyUniverse("no usable hosts in universe")
    by_tld: dict[str, list[OriginalUri]] = {}
    for uri in hosts:
        try:
            tld = extract_tld(uri.host, suffixes)
        except Exception:
            continue
        by_tld.setdefault(tld, []).append(uri)

    entries: list[SampleEntry] = []
    for tld in tlds:
        tld = tld.lower().lstrip(".")
        available = by_tld.get(tld, [])
        if not available:
            if strict:
                raise UnknownTld(f"TLD {tld!r} has no hosts in the universe")
            logger.warning("TLD %r has no hosts in the universe; skipped", tld)
            continue
        count = controlled_tld_count(len(available), spec)
        rng = _rng(spec.rng_seed, "tld", tld)
        for uri in rng.sample(available, count):
            entries.append(SampleEntry(uri, tld=tld))
    return UriSample(name, "directory_tld", tuple(entries))


def sample_controlled_language(
    universe: Iterable[tuple[OriginalUri | str, str]],
    spec: SampleSpec,
    name: str = "language",
) -> UriSample:
    """Per-language sample of min(available, per_language_count) hosts."""
    by_lang: dict[str, dict[str, OriginalUri]] = {}
    for raw, lang in universe:
        lang = lang.strip().lower()
        if not lang:
            continue
        try:
            uri = hostify(raw)
        except NoHost:
            continue
        by_lang.setdefault(lang, {}).setdefault(uri.host, uri)
    if not by_lang:
        raise EmptyUniverse("no usable (host, language) pairs in universe")

    entries: list[SampleEntry] = []
    for lang in sorted(by_lang):
        hosts = [by_lang[lang][h] for h in sorted(by_lang[lang])]
        rng = _rng(spec.rng_seed, "lang", lang)
        count = min(len(hosts), spec.per_language_count)
        for uri in rng.sample(hosts, count):
            entries.append(SampleEntry(uri, language=lang))
    return UriSample(name, "directory_language", tuple(entries))


# --- fulltext-search result ingestion ----------------------------------------

def ingest_fulltext_results(
    files: Iterable[str | Path],
    name: str = "fulltext",
    max_rank: int = 10,
) -> UriSample:
    """Ingest recorded fulltext-search results.

    Each row is ``archive_id<TAB>query<TAB>rank<TAB>uri``. Results are
    hostified and deduplicated per source archive; malformed rows are
    skipped with a warning. Per-archive unique-host counts are available
    via :func:`source_counts`.
    """
    per_archive: dict[str, dict[str, OriginalUri]] = {}
    archive_objs: dict[str, ArchiveId] = {}
    for path in files:
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) != 4:
                    logger.warning(
                        "%s:%d: expected 4 tab-separated fields, got %d; row skipped",
                        path, line_no, len(fields),
                    )
                    continue
                archive_token, _query, rank_text, raw_uri = fields
                try:
                    archive = archive_objs.setdefault(archive_token, ArchiveId(archive_token))
                    rank = int(rank_text)
                    if not 1 <= rank <= max_rank:
                        raise ValueError(f"rank out of range: {rank}")
                    uri = hostify(raw_uri)
                except (ValueError, NoHost) as exc:
                    logger.warning("%s:%d: %s; row skipped", path, line_no, exc)
                    continue
                per_archive.setdefault(archive_token, {}).setdefault(uri.host, uri)

    entries: list[SampleEntry] = []
    for token in sorted(per_archive):
        archive = archive_objs[token]
        hosts = per_archive[token]
        for host in sorted(hosts):
            entries.append(SampleEntry(hosts[host], source_archive=archive))
    return UriSample(name, "fulltext", tuple(entries))


def source_counts(sample: UriSample) -> dict[str, int]:
    """Unique-host count per source archive."""
    counts: dict[str, int] = {}
    for entry in sample.entries:
        if entry.source_archive is not None:
            counts[entry.source_archive.id] = counts.get(entry.source_archive.id, 0) + 1
    return counts


def split_by_source(sample: UriSample) -> dict[str, UriSample]:
    """Per-source-archive sub-samples of a fulltext sample."""
    groups: dict[str, list[SampleEntry]] = {}
    for entry in sample.entries:
        if entry.source_archive is None:
            continue
        groups.setdefault(entry.source_archive.id, []).append(entry)
    return {
        token: UriSample(f"{sample.name}:{token}", sample.source_kind, tuple(entries))
        for token, entries in sorted(groups.items())
    }


# --- access-log sampling ------------------------------------------------------

@dataclass(frozen=True)
class LogPatterns:
    """Request-path patterns that embed the original URI (group "uri")."""

    memento: re.Pattern = field(
        default=re.compile(r"^(?:/web)?/\d{14}[a-z_]{0,3}/(?P<uri>.+)$")
    )
    timemap: re.Pattern = field(
        default=re.compile(r"^(?:/web)?/timemap/link/(?P<uri>.+)$")
    )


DEFAULT_LOG_PATTERNS = LogPatterns()


@dataclass(frozen=True)
class AccessLogRecord:
    """One classified access-log request."""

    timestamp: datetime | None
    request_path: str
    kind: Literal["memento", "timemap", "other"]
    original: str | None = None


_CLF_RE = re.compile(
    r'^(\S+) (\S+) (\S+) \[([^\]]+)\] "(\S+) (\S+)(?: [^"]*)?" (\d{3}) (\S+)'
)
_CLF_TIME_RE = re.compile(
    r"^(\d{2})/(Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Oct|Nov|Dec)/(\d{4})"
    r":(\d{2}):(\d{2}):(\d{2}) ([+-])(\d{2})(\d{2})$"
)
_MONTHS = {m: i + 1 for i, m in enumerate(
    ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
     "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"))}


def _parse_clf_time(text: str) -> datetime | None:
    m = _CLF_TIME_RE.match(text)
    if m is None:
        return None
    day, mon, year, hh, mm, ss, sign, oh, om = m.groups()
    offset = timedelta(hours=int(oh), minutes=int(om))
    if sign == "-":
        offset = -offset
    try:
        local = datetime(int(year), _MONTHS[mon], int(day),
                         int(hh), int(mm), int(ss), tzinfo=timezone(offset))
    except ValueError:
        return None
    return local.astimezone(timezone.utc)


def classify_request(path: str, patterns: LogPatterns = DEFAULT_LOG_PATTERNS,
                     timestamp: datetime | None = None) -> AccessLogRecord:
    """Classify one request path as memento, TimeMap, or other."""
    m = patterns.timemap.match(path)
    if m is not None:
        return AccessLogRecord(timestamp, path, "timemap", m.group("uri"))
    m = patterns.memento.match(path)
    if m is not None:
        return AccessLogRecord(timestamp, path, "memento", m.group("uri"))
    return AccessLogRecord(timestamp, path, "other")


def parse_access_log(
    lines: Iterable[str],
    patterns: LogPatterns = DEFAULT_LOG_PATTERNS,
) -> Iterator[AccessLogRecord]:
    """Parse common/combined log format lines into classified records.

    Unparseable lines are dropped with a debug message; they carry no
    extractable request anyway.
    """
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        m = _CLF_RE.match(line)
        if m is None:
            logger.debug("unparseable log line skipped: %r", line[:120])
            continue
        timestamp = _parse_clf_time(m.group(4))
        yield classify_request(m.group(6), patterns, timestamp)


def sample_from_logs(
    records: Iterable[AccessLogRecord],
    n: int,
    spec: SampleSpec,
    name: str = "logs",
    kind: SourceKind = "wayback_log",
) -> UriSample:
    """Extract originals from memento/TimeMap requests and sample n hosts."""
    by_host: dict[str, OriginalUri] = {}
    for rec in records:
        if rec.kind == "other" or rec.original is None:
            continue
        try:
            uri = hostify(rec.original)
        except NoHost:
            continue
        by_host.setdefault(uri.host, uri)
    if not by_host:
        raise NoExtractableRequests("no memento or TimeMap requests in the log")
    hosts = [by_host[h] for h in sorted(by_host)]
    rng = _rng(spec.rng_seed, "logs")
    chosen = rng.sample(hosts, min(n, len(hosts)))
    return UriSample(name, kind, tuple(SampleEntry(u) for u in chosen))


# --- file formats -------------------------------------------------------------

def read_universe(path: str | Path) -> list[str]:
    """One URI per line; blank lines and # comments skipped."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                out.append(line)
    return out


def read_language_universe(path: str | Path) -> list[tuple[str, str]]:
    """Tab-separated ``uri<TAB>lang`` rows."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise MalformedRow("expected uri<TAB>lang", line_no, str(path))
            out.append((fields[0], fields[1]))
    return out


def write_sample(sample: UriSample, path: str | Path) -> None:
    """Write ``uri<TAB>tld<TAB>lang<TAB>source_archive`` rows (empty fields
    allowed), one per entry, trailing newline."""
    with open(path, "w", encoding="utf-8") as fh:
        for entry in sample.entries:
            fh.write("\t".join([
                entry.uri.value,
                entry.tld or "",
                entry.language or "",
                entry.source_archive.id if entry.source_archive else "",
            ]) + "\n")


def infer_sample_kind(entries: Sequence[SampleEntry]) -> SourceKind:
    if any(e.source_archive is not None for e in entries):
        return "fulltext"
    if any(e.language is not None for e in entries):
        return "directory_language"
    if any(e.tld is not None for e in entries):
        return "directory_tld"
    return "directory_random"


def read_sample(
    path: str | Path,
    name: str | None = None,
    kind: SourceKind | None = None,
) -> UriSample:
    """Read a sample file written by :func:`write_sample`.

    The source kind is inferred from the populated columns unless given.
    """
    entries: list[SampleEntry] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise MalformedRow("expected 4 tab-separated fields", line_no, str(path))
            uri_text, tld, lang, source = fields
            try:
                entry = SampleEntry(
                    OriginalUri(uri_text),
                    tld=tld or None,
                    language=lang or None,
                    source_archive=ArchiveId(source) if source else None,
                )
            except ValueError as exc:
                raise MalformedRow(str(exc), line_no, str(path)) from None
            entries.append(entry)
    return UriSample(
        name or Path(path).stem,
        kind or infer_sample_kind(entries),
        tuple(entries),
    )
