"""Archive profiling: coverage, cross-coverage, TLD and language
distributions, growth series, and the per-archive profile document.

Everything here is a pure computation over an immutable set of
LookupResults (one per archive x sample URI). A URI counts as *found*
in an archive only if the lookup returned a TimeMap with at least one
memento; an empty TimeMap is a miss.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import MissingLanguageLabels, NoData, NoTld, SampleMismatch
from .model import ArchiveId, OriginalUri, TimeMap
from .sampler import UriSample
from .uri_tools import SuffixSet, extract_tld

logger = logging.getLogger(__name__)

Outcome = str  # "ok" | "not-found" | "timeout" | "error"


@dataclass(frozen=True)
class LookupResult:
    """Outcome of looking one URI up in one archive."""

    archive: ArchiveId
    original: OriginalUri
    timemap: TimeMap | None
    fetched_at: datetime | None = None
    outcome: Outcome = ""

    def __post_init__(self):
        if self.timemap is not None and self.timemap.original.host != self.original.host:
            raise ValueError(
                f"timemap original {self.timemap.original.host!r} does not match "
                f"lookup URI {self.original.host!r}"
            )
        if not self.outcome:
            object.__setattr__(
                self, "outcome", "ok" if self.timemap is not None else "not-found"
            )

    @property
    def found(self) -> bool:
        return self.timemap is not None and len(self.timemap) > 0


class CoverageCount(NamedTuple):
    """found / sampled counts for one cell of a profile."""

    found: int
    sampled: int

    @property
    def rate(self) -> Fraction:
        if self.sampled == 0:
            return Fraction(0)
        return Fraction(self.found, self.sampled)


@dataclass(frozen=True)
class ArchiveCoverage:
    archive: ArchiveId
    found: int
    size: int

    @property
    def ratio(self) -> float:
        return self.found / self.size if self.size else 0.0


@dataclass(frozen=True)
class CoverageReport:
    """Per-archive coverage of one sample."""

    sample_name: str
    per_archive: tuple[ArchiveCoverage, ...]

    def ratio(self, archive_id: str) -> float:
        for cov in self.per_archive:
            if cov.archive.id == archive_id:
                return cov.ratio
        raise KeyError(archive_id)


@dataclass(frozen=True)
class CrossCoverageMatrix:
    """Coverage of each source archive's sample in each target archive."""

    sources: tuple[ArchiveId, ...]
    targets: tuple[ArchiveId, ...]
    cells: Mapping[tuple[str, str], CoverageCount]

    def ratio(self, source_id: str, target_id: str) -> float:
        count = self.cells[(source_id, target_id)]
        return count.found / count.sampled if count.sampled else 0.0


@dataclass(frozen=True)
class TldDistribution:
    """Found-URI counts per (archive, TLD), with per-archive shares."""

    counts: Mapping[str, Mapping[str, int]]

    def shares(self, archive_id: str) -> dict[str, float]:
        per_tld = self.counts.get(archive_id, {})
        total = sum(per_tld.values())
        if total == 0:
            return {}
        return {tld: found / total for tld, found in per_tld.items()}

    def tlds(self) -> list[str]:
        out: set[str] = set()
        for per_tld in self.counts.values():
            out.update(per_tld)
        return sorted(out)


@dataclass(frozen=True)
class LanguageDistribution:
    """found / slice-size per (archive, language)."""

    counts: Mapping[str, Mapping[str, CoverageCount]]

    def ratio(self, archive_id: str, language: str) -> float:
        count = self.counts[archive_id][language]
        return count.found / count.sampled if count.sampled else 0.0

    def languages(self) -> list[str]:
        out: set[str] = set()
        for per_lang in self.counts.values():
            out.update(per_lang)
        return sorted(out)


@dataclass(frozen=True)
class GrowthSeries:
    """Monthly new-URI and memento counts plus cumulative shares.

    Months are contiguous "YYYY-MM" buckets (UTC) from the first to the
    last observed capture. Cumulative shares are non-decreasing and end
    at exactly 1.0 when the total is nonzero.
    """

    months: tuple[str, ...]
    new_uris: tuple[int, ...]
    mementos: tuple[int, ...]

    def cumulative_uri_share(self) -> tuple[float, ...]:
        return _cumulative_share(self.new_uris)

    def cumulative_memento_share(self) -> tuple[float, ...]:
        return _cumulative_share(self.mementos)


def _cumulative_share(counts: Sequence[int]) -> tuple[float, ...]:
    total = sum(counts)
    if total == 0:
        return tuple(0.0 for _ in counts)
    out = []
    running = 0
    for c in counts:
        running += c
        out.append(running / total)
    return tuple(out)


@dataclass(frozen=True)
class ArchiveProfile:
    """One archive's profile: age, per-TLD and per-language coverage
    counts, and its growth series."""

    archive: ArchiveId
    age_start: datetime | None
    tld_coverage: Mapping[str, CoverageCount] = field(default_factory=dict)
    language_coverage: Mapping[str, CoverageCount] = field(default_factory=dict)
    growth: GrowthSeries | None = None

    def tld_rate(self, tld: str) -> Fraction:
        count = self.tld_coverage.get(tld)
        return count.rate if count is not None else Fraction(0)

    def global_rate(self) -> Fraction:
        found = sum(c.found for c in self.tld_coverage.values())
        sampled = sum(c.sampled for c in self.tld_coverage.values())
        return Fraction(found, sampled) if sampled else Fraction(0)


# --- computations -------------------------------------------------------------

def _index_results(
    results: Iterable[LookupResult],
) -> dict[str, dict[str, LookupResult]]:
    """archive id -> host -> result (first result wins per pair)."""
    index: dict[str, dict[str, LookupResult]] = {}
    for res in results:
        index.setdefault(res.archive.id, {}).setdefault(res.original.host, res)
    return index


def compute_coverage(
    sample: UriSample,
    results: Iterable[LookupResult],
    archives: Sequence[ArchiveId] | None = None,
) -> CoverageReport:
    """Found-URI fraction of the sample, per archive."""
    index = _index_results(results)
    sample_hosts = sample.hosts()
    for archive_id, per_host in index.items():
        for host in per_host:
            if host not in sample_hosts:
                raise SampleMismatch(
                    f"result for {host!r} (archive {archive_id}) is not in sample "
                    f"{sample.name!r}"
                )
    if archives is None:
        archive_list = sorted(
            (next(iter(per_host.values())).archive for per_host in index.values()),
            key=lambda a: a.id,
        )
    else:
        archive_list = sorted(archives, key=lambda a: a.id)

    size = len(sample_hosts)
    rows = []
    for archive in archive_list:
        per_host = index.get(archive.id, {})
        if len(per_host) < size:
            logger.warning(
                "archive %s has lookups for %d of %d sample hosts; missing ones "
                "count as not found",
                archive.id, len(per_host), size,
            )
        found = sum(1 for host in sample_hosts if host in per_host and per_host[host].found)
        rows.append(ArchiveCoverage(archive, found, size))
    return CoverageReport(sample.name, tuple(rows))


def compute_cross_coverage(
    samples_by_source: Mapping[str, UriSample],
    results: Iterable[LookupResult],
    targets: Sequence[ArchiveId] | None = None,
) -> CrossCoverageMatrix:
    """Cell (s, t): coverage of source s's sample when looked up in t.

    Targets default to every archive seen in the results, so archives
    that expose only URI lookup (no fulltext sample of their own) still
    appear as columns.
    """
    index = _index_results(results)
    if targets is None:
        target_list = sorted(
            (next(iter(per_host.values())).archive for per_host in index.values()),
            key=lambda a: a.id,
        )
    else:
        target_list = sorted(targets, key=lambda a: a.id)

    sources: list[ArchiveId] = []
    cells: dict[tuple[str, str], CoverageCount] = {}
    for source_id in sorted(samples_by_source):
        sample = samples_by_source[source_id]
        hosts = sample.hosts()
        source = ArchiveId(source_id)
        sources.append(source)
        for target in target_list:
            per_host = index.get(target.id, {})
            found = sum(1 for h in hosts if h in per_host and per_host[h].found)
            cells[(source_id, target.id)] = CoverageCount(found, len(hosts))
    return CrossCoverageMatrix(tuple(sources), tuple(target_list), cells)


def compute_tld_distribution(
    results: Iterable[LookupResult],
    suffixes: SuffixSet | None = None,
) -> TldDistribution:
    """Distribution of found URIs over TLDs, per archive."""
    counts: dict[str, dict[str, int]] = {}
    for res in results:
        if not res.found:
            continue
        try:
            tld = extract_tld(res.original.host, suffixes)
        except NoTld:
            logger.warning("host %r has no TLD; excluded from distribution",
                           res.original.host)
            continue
        per_tld = counts.setdefault(res.archive.id, {})
        per_tld[tld] = per_tld.get(tld, 0) + 1
    return TldDistribution(counts)


def compute_language_distribution(
    sample: UriSample,
    results: Iterable[LookupResult],
) -> LanguageDistribution:
    """Found fraction of each language slice, per archive."""
    if sample.source_kind != "directory_language":
        raise MissingLanguageLabels(
            f"sample {sample.name!r} is {sample.source_kind}, not directory_language"
        )
    lang_by_host: dict[str, str] = {}
    slice_sizes: dict[str, int] = {}
    for entry in sample.entries:
        if entry.language is None:
            raise MissingLanguageLabels(
                f"entry {entry.uri.value!r} in sample {sample.name!r} has no language"
            )
        lang_by_host[entry.uri.host] = entry.language
        slice_sizes[entry.language] = slice_sizes.get(entry.language, 0) + 1

    found: dict[str, dict[str, int]] = {}
    archive_ids: set[str] = set()
    for res in results:
        archive_ids.add(res.archive.id)
        lang = lang_by_host.get(res.original.host)
        if lang is None or not res.found:
            continue
        per_lang = found.setdefault(res.archive.id, {})
        per_lang[lang] = per_lang.get(lang, 0) + 1

    counts: dict[str, dict[str, CoverageCount]] = {}
    for archive_id in sorted(archive_ids):
        counts[archive_id] = {
            lang: CoverageCount(found.get(archive_id, {}).get(lang, 0), size)
            for lang, size in sorted(slice_sizes.items())
        }
    return LanguageDistribution(counts)


def _month_key(dt: datetime) -> str:
    dt = dt.astimezone(timezone.utc)
    return f"{dt.year:04d}-{dt.month:02d}"


def _month_range(first: str, last: str) -> list[str]:
    fy, fm = int(first[:4]), int(first[5:])
    ly, lm = int(last[:4]), int(last[5:])
    out = []
    y, m = fy, fm
    while (y, m) <= (ly, lm):
        out.append(f"{y:04d}-{m:02d}")
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return out


def compute_growth(results: Iterable[LookupResult]) -> dict[str, GrowthSeries]:
    """Monthly growth per archive.

    A memento counts in its capture month; a URI counts as new in the
    month of its earliest memento in that archive.
    """
    mementos: dict[str, dict[str, int]] = {}
    first_capture: dict[str, dict[str, str]] = {}
    for res in results:
        if res.timemap is None:
            continue
        archive_id = res.archive.id
        per_month = mementos.setdefault(archive_id, {})
        firsts = first_capture.setdefault(archive_id, {})
        for rec in res.timemap.mementos:
            month = _month_key(rec.datetime)
            per_month[month] = per_month.get(month, 0) + 1
            host = res.original.host
            if host not in firsts or month < firsts[host]:
                firsts[host] = month

    out: dict[str, GrowthSeries] = {}
    for archive_id, per_month in mementos.items():
        if not per_month:
            out[archive_id] = GrowthSeries((), (), ())
            continue
        new_uri_months: dict[str, int] = {}
        for month in first_capture[archive_id].values():
            new_uri_months[month] = new_uri_months.get(month, 0) + 1
        months = _month_range(min(per_month), max(per_month))
        out[archive_id] = GrowthSeries(
            tuple(months),
            tuple(new_uri_months.get(m, 0) for m in months),
            tuple(per_month.get(m, 0) for m in months),
        )
    return out


def build_profile(
    archive: ArchiveId,
    results: Iterable[LookupResult],
    sample: UriSample | None = None,
    suffixes: SuffixSet | None = None,
    include_growth: bool = True,
) -> ArchiveProfile:
    """Assemble one archive's profile from its lookup results.

    ``sample`` supplies language labels (and explicit TLD labels) when
    available; TLDs otherwise come straight from the looked-up hosts.
    ``include_growth=False`` skips the growth series, which routing does
    not need (the evaluation harness rebuilds profiles per fold).
    """
    own = [res for res in results if res.archive.id == archive.id]
    if not own:
        raise NoData(f"no lookup results for archive {archive.id}")

    label_by_host: dict[str, tuple[str | None, str | None]] = {}
    if sample is not None:
        for entry in sample.entries:
            label_by_host[entry.uri.host] = (entry.tld, entry.language)

    tld_counts: dict[str, list[int]] = {}
    lang_counts: dict[str, list[int]] = {}
    age_start: datetime | None = None
    seen_hosts: set[str] = set()
    for res in own:
        host = res.original.host
        if host in seen_hosts:
            continue
        seen_hosts.add(host)
        tld_label, lang_label = label_by_host.get(host, (None, None))
        if tld_label is None:
            try:
                tld_label = extract_tld(host, suffixes)
            except NoTld:
                tld_label = None
        if tld_label is not None:
            cell = tld_counts.setdefault(tld_label, [0, 0])
            cell[1] += 1
            if res.found:
                cell[0] += 1
        if lang_label is not None:
            cell = lang_counts.setdefault(lang_label, [0, 0])
            cell[1] += 1
            if res.found:
                cell[0] += 1
        if res.timemap is not None:
            for rec in res.timemap.mementos:
                if age_start is None or rec.datetime < age_start:
                    age_start = rec.datetime

    growth = None
    if include_growth:
        growth = compute_growth(own).get(archive.id, GrowthSeries((), (), ()))
    return ArchiveProfile(
        archive=archive,
        age_start=age_start,
        tld_coverage={t: CoverageCount(*c) for t, c in sorted(tld_counts.items())},
        language_coverage={l: CoverageCount(*c) for l, c in sorted(lang_counts.items())},
        growth=growth,
    )


def build_profiles(
    archives: Sequence[ArchiveId],
    results: Sequence[LookupResult],
    sample: UriSample | None = None,
    suffixes: SuffixSet | None = None,
    include_growth: bool = True,
) -> list[ArchiveProfile]:
    return [
        build_profile(archive, results, sample, suffixes, include_growth)
        for archive in sorted(archives, key=lambda a: a.id)
    ]


# --- profile file format -------------------------------------------------------

def _age_to_text(age: datetime | None) -> str | None:
    if age is None:
        return None
    age = age.astimezone(timezone.utc)
    return age.strftime("%Y-%m-%dT%H:%M:%SZ")


def _age_from_text(text: str | None) -> datetime | None:
    if text is None:
        return None
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def profiles_to_json(profiles: Sequence[ArchiveProfile]) -> str:
    """Serialize profiles to the interchange JSON document."""
    doc = {"archives": []}
    for profile in sorted(profiles, key=lambda p: p.archive.id):
        growth: dict[str, dict[str, int]] = {}
        if profile.growth is not None:
            for i, month in enumerate(profile.growth.months):
                growth[month] = {
                    "new_uris": profile.growth.new_uris[i],
                    "mementos": profile.growth.mementos[i],
                }
        doc["archives"].append({
            "id": profile.archive.id,
            "name": profile.archive.display_name,
            "age_start": _age_to_text(profile.age_start),
            "tld_coverage": {
                tld: {"found": c.found, "sampled": c.sampled}
                for tld, c in sorted(profile.tld_coverage.items())
            },
            "language_coverage": {
                lang: {"found": c.found, "sampled": c.sampled}
                for lang, c in sorted(profile.language_coverage.items())
            },
            "growth": growth,
        })
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def save_profiles(profiles: Sequence[ArchiveProfile], path: str | Path) -> None:
    Path(path).write_text(profiles_to_json(profiles), encoding="utf-8")


def load_profiles(path: str | Path) -> list[ArchiveProfile]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    profiles = []
    for item in doc["archives"]:
        months = sorted(item.get("growth", {}))
        growth = GrowthSeries(
            tuple(months),
            tuple(item["growth"][m]["new_uris"] for m in months),
            tuple(item["growth"][m]["mementos"] for m in months),
        ) if months else GrowthSeries((), (), ())
        profiles.append(ArchiveProfile(
            archive=ArchiveId(item["id"], item.get("name", "")),
            age_start=_age_from_text(item.get("age_start")),
            tld_coverage={
                tld: CoverageCount(c["found"], c["sampled"])
                for tld, c in item.get("tld_coverage", {}).items()
            },
            language_coverage={
                lang: CoverageCount(c["found"], c["sampled"])
                for lang, c in item.get("language_coverage", {}).items()
            },
            growth=growth,
        ))
    return profiles


# --- TSV report matrices --------------------------------------------------------

def matrix_tsv(
    row_labels: Sequence[str],
    col_labels: Sequence[str],
    cell,
    corner: str = "",
) -> str:
    """Labeled rows x columns matrix as TSV; ``cell(row, col)`` -> str."""
    lines = ["\t".join([corner, *col_labels])]
    for row in row_labels:
        lines.append("\t".join([row, *(cell(row, col) for col in col_labels)]))
    return "\n".join(lines) + "\n"


def coverage_tsv(report: CoverageReport) -> str:
    ids = [c.archive.id for c in report.per_archive]
    by_id = {c.archive.id: c for c in report.per_archive}
    return matrix_tsv(
        [report.sample_name], ids,
        lambda row, col: f"{by_id[col].ratio:.4f}",
        corner="sample",
    )


def cross_coverage_tsv(matrix: CrossCoverageMatrix, percent: bool = True) -> str:
    def cell(row: str, col: str) -> str:
        ratio = matrix.ratio(row, col)
        return f"{100 * ratio:.2f}" if percent else f"{ratio:.4f}"

    return matrix_tsv(
        [a.id for a in matrix.sources],
        [a.id for a in matrix.targets],
        cell,
        corner="source\\target",
    )


def tld_distribution_tsv(dist: TldDistribution) -> str:
    tlds = dist.tlds()
    archive_ids = sorted(dist.counts)
    shares = {a: dist.shares(a) for a in archive_ids}
    return matrix_tsv(
        archive_ids, tlds,
        lambda row, col: f"{shares[row].get(col, 0.0):.4f}",
        corner="archive\\tld",
    )


def language_distribution_tsv(dist: LanguageDistribution) -> str:
    languages = dist.languages()
    archive_ids = sorted(dist.counts)
    return matrix_tsv(
        archive_ids, languages,
        lambda row, col: f"{dist.ratio(row, col):.4f}",
        corner="archive\\lang",
    )


def growth_tsv(series_by_archive: Mapping[str, GrowthSeries]) -> str:
    """Long-form growth table for external plotting."""
    lines = ["archive\tmonth\tnew_uris\tmementos\tcum_uri_share\tcum_memento_share"]
    for archive_id in sorted(series_by_archive):
        series = series_by_archive[archive_id]
        uri_share = series.cumulative_uri_share()
        memento_share = series.cumulative_memento_share()
        for i, month in enumerate(series.months):
            lines.append(
                f"{archive_id}\t{month}\t{series.new_uris[i]}\t{series.mementos[i]}"
                f"\t{uri_share[i]:.6f}\t{memento_share[i]:.6f}"
            )
    return "\n".join(lines) + "\n"
