"""Deterministic simulated archives.

File-backed memento corpora stand in for live archives: the aggregator's
``sim-corpus`` transport serves TimeMaps straight from them, and the
synthetic generator fabricates a whole archive federation (one corpus
file per archive plus a manifest) from a seeded spec. The bundled
default spec models a familiar shape: one wide generalist that holds
nearly everything, a second-tier generalist, and national specialists
that dominate their own TLD.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import kernels
from .errors import MalformedRow
from .model import ArchiveId, MementoRecord, OriginalUri, TimeMap, _from_epoch

CORPUS_SUFFIX = ".tsv"
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class SimCorpus:
    """One simulated archive's holdings, indexed by original URI.

    Records are ``(uri_r, uri_m, epoch_seconds)`` with hostified uri_r
    and corpus-unique uri_m.
    """

    archive: ArchiveId
    records: tuple[tuple[str, str, int], ...]
    _index: dict = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        index: dict[str, list[int]] = {}
        seen_uri_m: set[str] = set()
        for pos, (uri_r, uri_m, _epoch) in enumerate(self.records):
            if uri_m in seen_uri_m:
                raise ValueError(f"duplicate uri_m in corpus {self.archive.id}: {uri_m!r}")
            seen_uri_m.add(uri_m)
            host = OriginalUri(uri_r).host
            if uri_r != f"http://{host}":
                raise ValueError(f"corpus uri_r is not hostified: {uri_r!r}")
            index.setdefault(uri_r, []).append(pos)
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.records)

    def holdings(self) -> set[str]:
        """The set of original URIs this archive holds."""
        return set(self._index)


def load_corpus(path: str | Path, archive: ArchiveId | None = None) -> SimCorpus:
    """Load a ``uri_r<TAB>uri_m<TAB>rfc1123-datetime`` corpus file.

    Corpora are test fixtures and must be exact: any malformed row is
    fatal. The archive id defaults to the file stem.
    """
    path = Path(path)
    if archive is None:
        archive = ArchiveId(path.stem)
    records: list[tuple[str, str, int]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise MalformedRow(
                    f"expected 3 tab-separated fields, got {len(fields)}",
                    line_no, str(path),
                )
            uri_r, uri_m, dt_text = fields
            try:
                epoch = kernels.parse_http_datetime(dt_text)
            except ValueError as exc:
                raise MalformedRow(str(exc), line_no, str(path)) from None
            records.append((uri_r, uri_m, epoch))
    try:
        return SimCorpus(archive, tuple(records))
    except ValueError as exc:
        raise MalformedRow(str(exc), None, str(path)) from None


def write_corpus(corpus: SimCorpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for uri_r, uri_m, epoch in corpus.records:
            fh.write(f"{uri_r}\t{uri_m}\t{kernels.format_http_datetime(epoch)}\n")


def serve_timemap(corpus: SimCorpus, uri: OriginalUri | str) -> TimeMap | None:
    """TimeMap of all records for a (hostified) URI; None when unknown."""
    key = uri.value if isinstance(uri, OriginalUri) else uri
    positions = corpus._index.get(key)
    if positions is None:
        return None
    records = [
        MementoRecord(uri_m, _from_epoch(epoch), corpus.archive)
        for _uri_r, uri_m, epoch in (corpus.records[p] for p in positions)
    ]
    return TimeMap.build(OriginalUri(key), records)


# --- synthetic generation ------------------------------------------------------

@dataclass(frozen=True)
class SynthArchive:
    """Generation parameters for one simulated archive.

    ``tld_affinity`` maps TLD label -> inclusion probability; the key
    ``"*"`` is the default for unlisted TLDs. ``months`` is the capture
    horizon: a URI's first capture lands uniformly inside it and later
    captures follow in consecutive months.
    """

    archive: ArchiveId
    tld_affinity: Mapping[str, float]
    start_month: str  # "YYYY-MM"
    mementos_per_uri: float = 2.0
    months: int = 60

    def __post_init__(self):
        for tld, p in self.tld_affinity.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"affinity for {tld!r} out of [0,1]: {p}")
        if self.mementos_per_uri < 1.0:
            raise ValueError("mementos_per_uri mean must be >= 1")
        if self.months < 1:
            raise ValueError("months must be >= 1")
        year, month = self.start_month.split("-")
        if not (len(year) == 4 and len(month) == 2):
            raise ValueError(f"start_month must be YYYY-MM: {self.start_month!r}")

    def affinity_for(self, tld: str) -> float:
        if tld in self.tld_affinity:
            return self.tld_affinity[tld]
        return self.tld_affinity.get("*", 0.0)


@dataclass(frozen=True)
class SynthSpec:
    """A reproducible federation: same spec (seed included) means
    byte-identical corpora.

    ``collision_mode`` mints archive-agnostic uri_m values at fixed
    day/time offsets so overlapping holdings collide across archives,
    which exercises merge dedup.
    """

    rng_seed: int
    archives: tuple[SynthArchive, ...]
    universe: tuple[str, ...]
    collision_mode: bool = False

    def __post_init__(self):
        object.__setattr__(self, "archives", tuple(self.archives))
        object.__setattr__(self, "universe", tuple(self.universe))
        ids = [a.archive.id for a in self.archives]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate archive ids in spec")


def _poisson(rng: random.Random, mean: float) -> int:
    if mean <= 0.0:
        return 0
    threshold = math.exp(-mean)
    k = 0
    p = 1.0
    while True:
        p *= rng.random()
        if p <= threshold:
            return k
        k += 1


def _month_add(start: str, offset: int) -> tuple[int, int]:
    year, month = int(start[:4]), int(start[5:])
    total = (year * 12 + (month - 1)) + offset
    return total // 12, total % 12 + 1


def _tld_of(host_uri: str) -> str:
    return host_uri.rsplit(".", 1)[-1]


def generate_synthetic(spec: SynthSpec) -> list[SimCorpus]:
    """Generate one corpus per archive from the spec, deterministically.

    Each universe URI is included with its TLD-affinity probability
    (independent draws per archive); each included URI gets
    1 + Poisson(mean - 1) mementos in consecutive months starting at a
    uniform offset inside the archive's horizon.
    """
    corpora = []
    for arch in spec.archives:
        rng = random.Random(f"{spec.rng_seed}:{arch.archive.id}")
        records: list[tuple[str, str, int]] = []
        for uri_r in spec.universe:
            draw = rng.random()
            if draw >= arch.affinity_for(_tld_of(uri_r)):
                continue
            count = 1 + _poisson(rng, arch.mementos_per_uri - 1.0)
            first_offset = rng.randrange(arch.months)
            host_part = uri_r[len("http://"):]
            for j in range(count):
                year, month = _month_add(arch.start_month, first_offset + j)
                if spec.collision_mode:
                    day, hour, minute, second = 1, 0, 0, 0
                    prefix = "sim://shared"
                else:
                    day = 1 + rng.randrange(28)
                    hour = rng.randrange(24)
                    minute = rng.randrange(60)
                    second = rng.randrange(60)
                    prefix = f"sim://{arch.archive.id}"
                stamp = f"{year:04d}{month:02d}{day:02d}{hour:02d}{minute:02d}{second:02d}"
                uri_m = f"{prefix}/{stamp}/{host_part}"
                epoch = _civil_epoch(year, month, day, hour, minute, second)
                records.append((uri_r, uri_m, epoch))
        if spec.collision_mode:
            records = _dedup_within(records)
        corpora.append(SimCorpus(arch.archive, tuple(records)))
    return corpora


def _dedup_within(records: list[tuple[str, str, int]]) -> list[tuple[str, str, int]]:
    # collision mode can only collide a uri_m within one corpus when the
    # same URI draws overlapping month runs; keep the first.
    seen: set[str] = set()
    out = []
    for rec in records:
        if rec[1] in seen:
            continue
        seen.add(rec[1])
        out.append(rec)
    return out


def _civil_epoch(year: int, month: int, day: int, hour: int, minute: int, second: int) -> int:
    y = year - (month <= 2)
    era = (y if y >= 0 else y - 399) // 400
    yoe = y - era * 400
    mp = (month + 9) % 12
    doy = (153 * mp + 2) // 5 + day - 1
    doe = yoe * 365 + yoe // 4 - yoe // 100 + doy
    days = era * 146097 + doe - 719468
    return days * 86400 + hour * 3600 + minute * 60 + second


def write_corpora(
    corpora: Sequence[SimCorpus],
    out_dir: str | Path,
    spec: SynthSpec | None = None,
) -> Path:
    """Write one corpus file per archive plus a manifest; returns the
    manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"archives": {}}
    if spec is not None:
        manifest["rng_seed"] = spec.rng_seed
        manifest["universe_size"] = len(spec.universe)
        manifest["collision_mode"] = spec.collision_mode
        manifest["parameters"] = {
            arch.archive.id: {
                "display_name": arch.archive.display_name,
                "tld_affinity": dict(sorted(arch.tld_affinity.items())),
                "start_month": arch.start_month,
                "mementos_per_uri": arch.mementos_per_uri,
                "months": arch.months,
            }
            for arch in spec.archives
        }
    for corpus in corpora:
        filename = corpus.archive.id + CORPUS_SUFFIX
        write_corpus(corpus, out_dir / filename)
        manifest["archives"][corpus.archive.id] = {
            "file": filename,
            "records": len(corpus.records),
            "uris": len(corpus.holdings()),
        }
    manifest_path = out_dir / MANIFEST_NAME
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest_path


def load_corpora(corpus_dir: str | Path) -> dict[str, SimCorpus]:
    """Load every corpus in a directory (via its manifest when present)."""
    corpus_dir = Path(corpus_dir)
    manifest_path = corpus_dir / MANIFEST_NAME
    corpora: dict[str, SimCorpus] = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        for archive_id, info in sorted(manifest["archives"].items()):
            display = (
                manifest.get("parameters", {})
                .get(archive_id, {})
                .get("display_name", "")
            )
            corpus = load_corpus(
                corpus_dir / info["file"], ArchiveId(archive_id, display)
            )
            corpora[archive_id] = corpus
    else:
        for path in sorted(corpus_dir.glob("*" + CORPUS_SUFFIX)):
            corpus = load_corpus(path)
            corpora[corpus.archive.id] = corpus
    return corpora


# --- bundled default federation --------------------------------------------------

_UNIVERSE_TLDS: tuple[tuple[str, int, str], ...] = (
    # (tld, weight per 100 hosts, language label)
    ("com", 26, "en"),
    ("org", 12, "en"),
    ("net", 7, "en"),
    ("uk", 9, "en"),
    ("ca", 6, "en"),
    ("pt", 6, "pt"),
    ("cz", 5, "cs"),
    ("hr", 4, "hr"),
    ("cat", 4, "ca"),
    ("tw", 4, "zh"),
    ("is", 4, "is"),
    ("de", 3, "de"),
    ("fr", 3, "fr"),
    ("es", 2, "es"),
    ("it", 2, "it"),
    ("jp", 2, "ja"),
    ("cn", 1, "zh"),
)


def default_universe(n: int = 2000, seed: int = 7) -> list[tuple[str, str]]:
    """Deterministic (host URI, language) universe with a fixed TLD mix."""
    rng = random.Random(f"{seed}:universe")
    weighted: list[tuple[str, str]] = []
    for tld, weight, lang in _UNIVERSE_TLDS:
        weighted.extend([(tld, lang)] * weight)
    out = []
    for i in range(n):
        tld, lang = weighted[rng.randrange(len(weighted))]
        out.append((f"http://site-{i:05d}.{tld}", lang))
    return out


def default_spec(
    universe: Iterable[str] | None = None,
    seed: int = 42,
    universe_size: int = 2000,
) -> SynthSpec:
    """The bundled 12-archive federation used by the evaluation suite."""
    if universe is None:
        universe = [uri for uri, _lang in default_universe(universe_size)]
    mk = ArchiveId
    archives = (
        SynthArchive(mk("wide", "Wide Web Archive (sim)"),
                     {"*": 0.92}, "1996-01", 3.0, 200),
        SynthArchive(mk("mirror", "Mirror Crawl Collective (sim)"),
                     {"*": 0.35}, "2006-01", 2.0, 120),
        SynthArchive(mk("lockbox", "Lockbox Library Collection (sim)"),
                     {"com": 0.12, "org": 0.15, "net": 0.10}, "2000-06", 1.5, 36),
        SynthArchive(mk("frost", "Frost National Archive (sim)"),
                     {"is": 0.90, "*": 0.02}, "2004-01", 2.2, 120),
        SynthArchive(mk("maple", "Maple National Archive (sim)"),
                     {"ca": 0.85}, "2005-01", 1.8, 60),
        SynthArchive(mk("albion", "Albion Web Archive (sim)"),
                     {"uk": 0.80, "*": 0.05}, "2007-01", 2.5, 90),
        SynthArchive(mk("crown", "Crown Records Archive (sim)"),
                     {"uk": 0.70, "*": 0.08}, "2003-06", 2.0, 110),
        SynthArchive(mk("porto", "Porto Web Archive (sim)"),
                     {"pt": 0.90, "*": 0.10}, "1996-06", 2.8, 210),
        SynthArchive(mk("besalu", "Besalu Heritage Archive (sim)"),
                     {"cat": 0.90, "es": 0.30, "*": 0.03}, "2006-01", 2.0, 100),
        SynthArchive(mk("adria", "Adria Web Archive (sim)"),
                     {"hr": 0.80, "*": 0.02}, "2004-06", 1.6, 100),
        SynthArchive(mk("bohemia", "Bohemia Web Archive (sim)"),
                     {"cz": 0.85, "*": 0.04}, "2001-01", 2.4, 140),
        SynthArchive(mk("formosa", "Formosa University Archive (sim)"),
                     {"tw": 0.85, "cn": 0.30, "jp": 0.30, "*": 0.02}, "2002-01", 1.7, 130),
    )
    return SynthSpec(rng_seed=seed, archives=archives, universe=tuple(universe))
