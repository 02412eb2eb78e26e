"""Configuration file loading.

One JSON document describes the archive federation and run defaults:

    {
      "archives": [
        {"id": "wide", "name": "Wide Web Archive",
         "transport": "sim-corpus", "corpus": "corpora/wide.tsv"},
        {"id": "live", "name": "A Live Archive", "transport": "http",
         "timemap_template": "https://archive.example/timemap/link/{uri}",
         "timeout": 10.0}
      ],
      "suffix_list": "suffixes.txt",
      "output_dir": "out",
      "concurrency": 4,
      "seed": 42,
      "log_patterns": {"memento": "...", "timemap": "..."}
    }

Sim endpoints accept optional fault injection: "timeout_rate",
"error_rate", "fault_seed". Relative paths resolve against the config
file's directory; referenced paths must exist at load time.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .aggregator import ArchiveEndpoint
from .errors import ConfigError
from .model import ArchiveId
from .sampler import DEFAULT_LOG_PATTERNS, LogPatterns
from .simarchive import SimCorpus, load_corpus
from .uri_tools import SuffixSet


@dataclass(frozen=True)
class Config:
    archives: tuple[ArchiveEndpoint, ...]
    suffix_list_path: Path | None = None
    output_dir: Path | None = None
    concurrency: int = 1
    seed: int | None = None
    log_patterns: LogPatterns = field(default=DEFAULT_LOG_PATTERNS)

    def endpoints(self) -> list[ArchiveEndpoint]:
        return list(self.archives)

    def load_corpora(self) -> dict[str, SimCorpus]:
        corpora = {}
        for ep in self.archives:
            if ep.transport == "sim-corpus":
                corpora[ep.archive.id] = load_corpus(ep.corpus_path, ep.archive)
        return corpora

    def suffixes(self) -> SuffixSet | None:
        if self.suffix_list_path is None:
            return None
        return SuffixSet.load(self.suffix_list_path)


def load_config(path: str | Path) -> Config:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    base = path.parent

    raw_archives = doc.get("archives")
    if not raw_archives:
        raise ConfigError("config lists no archives")
    endpoints: list[ArchiveEndpoint] = []
    seen_ids: set[str] = set()
    for item in raw_archives:
        try:
            archive_id = item["id"]
        except (KeyError, TypeError):
            raise ConfigError(f"archive entry without an id: {item!r}") from None
        if archive_id in seen_ids:
            raise ConfigError(f"duplicate archive id: {archive_id!r}")
        seen_ids.add(archive_id)
        transport = item.get("transport", "http")
        corpus_path = None
        if transport == "sim-corpus":
            corpus = item.get("corpus")
            if corpus is None:
                raise ConfigError(f"sim archive {archive_id!r} has no corpus path")
            corpus_path = base / corpus
            if not corpus_path.exists():
                raise ConfigError(f"corpus for {archive_id!r} not found: {corpus_path}")
        try:
            endpoints.append(ArchiveEndpoint(
                archive=ArchiveId(archive_id, item.get("name", "")),
                timemap_uri_template=item.get(
                    "timemap_template", "sim://archive/{uri}"
                ),
                timeout=float(item.get("timeout", 10.0)),
                transport=transport,
                corpus_path=str(corpus_path) if corpus_path else None,
                timeout_rate=float(item.get("timeout_rate", 0.0)),
                error_rate=float(item.get("error_rate", 0.0)),
                fault_seed=int(item.get("fault_seed", 0)),
            ))
        except ValueError as exc:
            raise ConfigError(f"archive {archive_id!r}: {exc}") from None

    suffix_list_path = None
    if doc.get("suffix_list"):
        suffix_list_path = base / doc["suffix_list"]
        if not suffix_list_path.exists():
            raise ConfigError(f"suffix list not found: {suffix_list_path}")

    output_dir = (base / doc["output_dir"]) if doc.get("output_dir") else None

    patterns = DEFAULT_LOG_PATTERNS
    if doc.get("log_patterns"):
        raw = doc["log_patterns"]
        try:
            patterns = LogPatterns(
                memento=re.compile(raw.get("memento", DEFAULT_LOG_PATTERNS.memento.pattern)),
                timemap=re.compile(raw.get("timemap", DEFAULT_LOG_PATTERNS.timemap.pattern)),
            )
        except re.error as exc:
            raise ConfigError(f"bad log pattern: {exc}") from None
        for name, pattern in (("memento", patterns.memento), ("timemap", patterns.timemap)):
            if "uri" not in pattern.groupindex:
                raise ConfigError(f"log pattern {name!r} lacks a (?P<uri>...) group")

    concurrency = int(doc.get("concurrency", 1))
    if concurrency < 1:
        raise ConfigError("concurrency must be >= 1")

    return Config(
        archives=tuple(endpoints),
        suffix_list_path=suffix_list_path,
        output_dir=output_dir,
        concurrency=concurrency,
        seed=doc.get("seed"),
        log_patterns=patterns,
    )
