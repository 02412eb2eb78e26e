"""Archive ranking from TLD profiles.

The score of an archive for a URI is its per-TLD coverage rate
(found/sampled on training data) for the URI's TLD. Rates, not found
shares, keep archives with different sample exposure comparable. Ties
break on global coverage rate, then on archive id, so a ranking is a
deterministic pure function of (uri, profiles, policy).

URIs whose host has no TLD at all (``localhost``, IP literals) cannot be
scored; they are routed by the policy's fallback order (by default the
global-coverage order) and the ranking is flagged.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import NoTld, PolicyError
from .model import ArchiveId, OriginalUri
from .profiler import ArchiveProfile
from .uri_tools import SuffixSet, extract_tld, hostify


@dataclass(frozen=True)
class RoutingPolicy:
    """How many archives to query and which to exclude."""

    k: int
    exclude: frozenset[str] = frozenset()
    fallback_order: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "exclude", frozenset(self.exclude))
        object.__setattr__(self, "fallback_order", tuple(self.fallback_order))
        if self.k < 1:
            raise PolicyError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class ArchiveRanking:
    """Ordered (archive, score) list for one URI with the top-k cut."""

    uri: OriginalUri
    tld: str | None
    ranking: tuple[tuple[ArchiveId, Fraction], ...]
    k: int
    fallback: bool = False

    def __post_init__(self):
        scores = [score for _, score in self.ranking]
        if any(s2 > s1 for s1, s2 in zip(scores, scores[1:])):
            raise ValueError("ranking scores must be non-increasing")

    @property
    def chosen(self) -> tuple[ArchiveId, ...]:
        return tuple(archive for archive, _ in self.ranking[: self.k])


def rank_archives(
    uri: OriginalUri | str,
    profiles: Sequence[ArchiveProfile],
    policy: RoutingPolicy,
    suffixes: SuffixSet | None = None,
) -> ArchiveRanking:
    """Rank non-excluded archives for a URI and cut at policy.k."""
    uri = hostify(uri)
    candidates = [p for p in profiles if p.archive.id not in policy.exclude]
    if not candidates:
        raise PolicyError("every configured archive is excluded")
    if policy.k > len(candidates):
        raise PolicyError(
            f"k={policy.k} exceeds the {len(candidates)} archives available "
            "after exclusion"
        )

    global_rates = {p.archive.id: p.global_rate() for p in candidates}
    try:
        tld = extract_tld(uri.host, suffixes)
    except NoTld:
        order = _fallback_order(candidates, policy, global_rates)
        ranking = tuple((p.archive, Fraction(0)) for p in order)
        return ArchiveRanking(uri, None, ranking, policy.k, fallback=True)

    def sort_key(profile: ArchiveProfile):
        return (
            -profile.tld_rate(tld),
            -global_rates[profile.archive.id],
            profile.archive.id,
        )

    ordered = sorted(candidates, key=sort_key)
    ranking = tuple((p.archive, p.tld_rate(tld)) for p in ordered)
    return ArchiveRanking(uri, tld, ranking, policy.k)


def _fallback_order(
    candidates: Sequence[ArchiveProfile],
    policy: RoutingPolicy,
    global_rates: dict[str, Fraction],
) -> list[ArchiveProfile]:
    by_coverage = sorted(
        candidates, key=lambda p: (-global_rates[p.archive.id], p.archive.id)
    )
    if not policy.fallback_order:
        return by_coverage
    explicit = {aid: i for i, aid in enumerate(policy.fallback_order)}
    tail_rank = {p.archive.id: i for i, p in enumerate(by_coverage)}
    return sorted(
        candidates,
        key=lambda p: (
            explicit.get(p.archive.id, len(explicit)),
            tail_rank[p.archive.id],
        ),
    )


def explain_ranking(ranking: ArchiveRanking) -> str:
    """Per-URI explanation lines: uri, tld, rank, archive, score."""
    lines = []
    if ranking.fallback:
        lines.append(f"# fallback: no usable TLD for {ranking.uri.value}")
    tld = ranking.tld if ranking.tld is not None else "-"
    for position, (archive, score) in enumerate(ranking.ranking, start=1):
        lines.append(
            f"{ranking.uri.value}\t{tld}\t{position}\t{archive.id}\t{float(score):.6f}"
        )
    return "\n".join(lines) + "\n"
