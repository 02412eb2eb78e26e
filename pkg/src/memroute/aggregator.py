"""TimeMap fetching and aggregation.

Fetches one URI's TimeMap from every configured archive endpoint (live
HTTP or a simulated corpus), merges the full and the routed subsets, and
scores the routed subset: success = routed mementos / full mementos,
kept as an exact rational.

Fan-out contract: per-archive fetches for one URI are independent, run
concurrently up to a configurable bound, each with its own timeout, and
merging happens only after every outcome resolves, in a canonical order
(chosen archives first, then the rest by id). The result is therefore
identical regardless of response arrival order. Per-archive failures
never abort the batch; a failed archive is simply absent from the full
TimeMap for that URI, and the outcome is recorded.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Mapping, Sequence
from urllib.parse import quote

import requests

from .errors import AllArchivesFailed, LinkFormatError
from .model import ArchiveId, OriginalUri, TimeMap, merge_timemaps, parse_link_format
from .profiler import LookupResult
from .router import ArchiveRanking
from .simarchive import SimCorpus, serve_timemap


@dataclass(frozen=True)
class ArchiveEndpoint:
    """Where and how to fetch one archive's TimeMaps.

    ``sim-corpus`` endpoints serve from a SimCorpus instead of HTTP and
    can inject deterministic faults (per-URI seeded draws), which is how
    the timeout/error handling gets exercised without a network.
    """

    archive: ArchiveId
    timemap_uri_template: str = "sim://archive/{uri}"
    timeout: float = 10.0
    transport: str = "http"  # "http" | "sim-corpus"
    corpus_path: str | None = None
    timeout_rate: float = 0.0
    error_rate: float = 0.0
    fault_seed: int = 0

    def __post_init__(self):
        if self.timemap_uri_template.count("{uri}") != 1:
            raise ValueError(
                f"template must contain exactly one {{uri}} placeholder: "
                f"{self.timemap_uri_template!r}"
            )
        if self.transport not in ("http", "sim-corpus"):
            raise ValueError(f"unknown transport: {self.transport!r}")
        if not 0.0 <= self.timeout_rate + self.error_rate <= 1.0:
            raise ValueError("fault rates must be within [0,1] combined")

    def url_for(self, uri: OriginalUri) -> str:
        return self.timemap_uri_template.replace("{uri}", quote(uri.value, safe=""))


@dataclass(frozen=True)
class AggregationResult:
    """Full vs routed TimeMap for one URI plus per-archive outcomes."""

    uri: OriginalUri
    full: TimeMap
    routed: TimeMap
    outcomes: Mapping[str, str]
    success: Fraction
    vacuous: bool = False

    @property
    def complete(self) -> bool:
        return self.success == 1


def format_success(success: Fraction) -> str:
    """Display form: two decimals, round half up (10/15 -> "0.67")."""
    value = Decimal(success.numerator) / Decimal(success.denominator)
    return str(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _sim_fault(ep: ArchiveEndpoint, uri: OriginalUri) -> str | None:
    if ep.timeout_rate <= 0.0 and ep.error_rate <= 0.0:
        return None
    draw = random.Random(f"{ep.fault_seed}:{ep.archive.id}:{uri.value}").random()
    if draw < ep.timeout_rate:
        return "timeout"
    if draw < ep.timeout_rate + ep.error_rate:
        return "error"
    return None


def fetch_timemap(
    ep: ArchiveEndpoint,
    uri: OriginalUri,
    corpus: SimCorpus | None = None,
    session=None,
) -> LookupResult:
    """Fetch one archive's TimeMap for a hostified URI.

    Failures become outcomes ("timeout", "error"), never exceptions, so
    a batch can keep going.
    """
    fetched_at = datetime.now(timezone.utc)
    if ep.transport == "sim-corpus":
        fault = _sim_fault(ep, uri)
        if fault is not None:
            return LookupResult(ep.archive, uri, None, fetched_at, fault)
        if corpus is None:
            raise ValueError(f"sim endpoint {ep.archive.id} needs a corpus")
        timemap = serve_timemap(corpus, uri)
        return LookupResult(ep.archive, uri, timemap, fetched_at)

    http = session if session is not None else requests
    try:
        response = http.get(
            ep.url_for(uri),
            timeout=ep.timeout,
            headers={"Accept": "application/link-format"},
        )
    except requests.exceptions.Timeout:
        return LookupResult(ep.archive, uri, None, fetched_at, "timeout")
    except requests.exceptions.RequestException:
        return LookupResult(ep.archive, uri, None, fetched_at, "error")
    if response.status_code == 404:
        return LookupResult(ep.archive, uri, None, fetched_at, "not-found")
    if response.status_code != 200:
        return LookupResult(ep.archive, uri, None, fetched_at, "error")
    try:
        timemap = parse_link_format(response.content, archive=ep.archive)
    except LinkFormatError:
        return LookupResult(ep.archive, uri, None, fetched_at, "error")
    if timemap.original.host != uri.host:
        return LookupResult(ep.archive, uri, None, fetched_at, "error")
    return LookupResult(ep.archive, uri, timemap, fetched_at)


def fetch_all(
    endpoints: Sequence[ArchiveEndpoint],
    uri: OriginalUri,
    corpora: Mapping[str, SimCorpus] | None = None,
    max_workers: int = 1,
    session=None,
) -> list[LookupResult]:
    """Fan out one URI to every endpoint; results in endpoint order."""
    corpora = corpora or {}

    def one(ep: ArchiveEndpoint) -> LookupResult:
        return fetch_timemap(ep, uri, corpora.get(ep.archive.id), session)

    if max_workers <= 1 or len(endpoints) <= 1:
        return [one(ep) for ep in endpoints]
    with ThreadPoolExecutor(max_workers=min(max_workers, len(endpoints))) as pool:
        futures = [pool.submit(one, ep) for ep in endpoints]
        return [f.result() for f in futures]


def aggregate_results(
    uri: OriginalUri,
    results: Sequence[LookupResult],
    chosen: Sequence[ArchiveId],
) -> AggregationResult:
    """Pure aggregation core over already-fetched per-archive results.

    The full TimeMap merges every available response; the routed one
    merges only the chosen archives. Merge order is chosen-first (in
    ranking order) then the remaining archives by id, which pins the
    dedup tie rule and makes routed a true subset of full.
    """
    by_archive = {res.archive.id: res for res in results}
    chosen_ids = [a.id for a in chosen]
    missing = [aid for aid in chosen_ids if aid not in by_archive]
    if missing:
        raise ValueError(f"chosen archives have no endpoint/result: {missing}")

    outcomes = {res.archive.id: res.outcome for res in results}
    if all(res.outcome in ("timeout", "error") for res in results):
        raise AllArchivesFailed(
            f"no archive produced a response for {uri.value}"
        )

    merge_order = chosen_ids + sorted(aid for aid in by_archive if aid not in chosen_ids)
    full_maps = [
        by_archive[aid].timemap
        for aid in merge_order
        if by_archive[aid].timemap is not None
    ]
    routed_maps = [
        by_archive[aid].timemap
        for aid in chosen_ids
        if by_archive[aid].timemap is not None
    ]
    full = merge_timemaps(full_maps) if full_maps else TimeMap(uri, ())
    routed = merge_timemaps(routed_maps) if routed_maps else TimeMap(uri, ())

    if len(full) == 0:
        success = Fraction(1)
        vacuous = True
    else:
        success = Fraction(len(routed), len(full))
        vacuous = False
    return AggregationResult(
        uri=uri,
        full=full,
        routed=routed,
        outcomes=dict(sorted(outcomes.items())),
        success=success,
        vacuous=vacuous,
    )


def aggregate(
    uri: OriginalUri,
    endpoints: Sequence[ArchiveEndpoint],
    ranking: ArchiveRanking,
    corpora: Mapping[str, SimCorpus] | None = None,
    max_workers: int = 1,
    session=None,
) -> AggregationResult:
    """Fetch from all endpoints and aggregate for one routed URI."""
    endpoint_ids = {ep.archive.id for ep in endpoints}
    for archive in ranking.chosen:
        if archive.id not in endpoint_ids:
            raise ValueError(f"chosen archive {archive.id} has no endpoint")
    results = fetch_all(endpoints, uri, corpora, max_workers, session)
    return aggregate_results(uri, results, ranking.chosen)
