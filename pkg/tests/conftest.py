"""Shared fixtures: the 12-archive simulated world and helpers."""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

import pytest

from memroute.model import OriginalUri
from memroute.sampler import SampleEntry, UriSample, sample_controlled_language
from memroute.sampler import SampleSpec
from memroute.simarchive import (
    SimCorpus,
    SynthSpec,
    default_spec,
    default_universe,
    generate_synthetic,
    write_corpora,
)

DATA_DIR = Path(__file__).parent / "data"

WORLD_SEED = 42
WORLD_SIZE = 2000


@dataclass(frozen=True)
class World:
    """The bundled evaluation federation, on disk and in memory."""

    dir: Path
    spec: SynthSpec
    corpora: dict[str, SimCorpus]
    universe_pairs: tuple[tuple[str, str], ...]  # (host uri, language)

    @property
    def archive_ids(self) -> list[str]:
        return sorted(self.corpora)

    def universe_sample(self, name: str = "universe") -> UriSample:
        return UriSample(
            name,
            "directory_random",
            tuple(SampleEntry(OriginalUri(uri)) for uri, _ in self.universe_pairs),
        )

    def language_sample(self, per_language: int = 100) -> UriSample:
        spec = SampleSpec(rng_seed=11, per_language_count=per_language)
        return sample_controlled_language(self.universe_pairs, spec, name="langs")


@pytest.fixture(scope="session")
def world(tmp_path_factory) -> World:
    out_dir = tmp_path_factory.mktemp("world")
    universe_pairs = tuple(default_universe(WORLD_SIZE, seed=7))
    spec = default_spec([uri for uri, _ in universe_pairs], seed=WORLD_SEED)
    corpora = generate_synthetic(spec)
    write_corpora(corpora, out_dir, spec)
    return World(
        dir=out_dir,
        spec=spec,
        corpora={c.archive.id: c for c in corpora},
        universe_pairs=universe_pairs,
    )


@pytest.fixture(scope="session")
def fulltext_file(world, tmp_path_factory) -> Path:
    """Synthetic fulltext-search results: per archive, mostly hosts the
    archive holds plus a few it does not (fulltext and URI lookup can
    disagree), with paths and ranks 1..10."""
    rng = random.Random("fulltext-fixture")
    all_hosts = [uri[len("http://"):] for uri, _ in world.universe_pairs]
    path = tmp_path_factory.mktemp("fulltext") / "results.tsv"
    with open(path, "w", encoding="utf-8") as fh:
        for archive_id in world.archive_ids:
            held = sorted(
                uri[len("http://"):] for uri in world.corpora[archive_id].holdings()
            )
            picked = rng.sample(held, min(120, len(held)))
            absent = [h for h in rng.sample(all_hosts, 40)
                      if f"http://{h}" not in world.corpora[archive_id].holdings()][:8]
            for j, host in enumerate(picked + absent):
                rank = j % 10 + 1
                fh.write(f"{archive_id}\tq{j // 10}\t{rank}\thttp://{host}/page/{j}\n")
    return path
