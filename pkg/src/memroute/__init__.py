"""memroute: web archive profiling and Memento TimeMap query routing.

Builds per-archive profiles (age, TLD coverage, language coverage,
growth) from URI samples, routes TimeMap requests to the top-k archives
most likely to hold a URI, merges the results, and measures how much of
the full aggregated TimeMap the routed subset recovers.
"""

from .aggregator import (
    AggregationResult,
    ArchiveEndpoint,
    aggregate,
    fetch_timemap,
    format_success,
)
from .errors import MemrouteError
from .model import (
    ArchiveId,
    MementoRecord,
    OriginalUri,
    TimeMap,
    merge_timemaps,
    parse_link_format,
    serialize_link_format,
)
from .profiler import ArchiveProfile, LookupResult, build_profile
from .router import ArchiveRanking, RoutingPolicy, rank_archives
from .sampler import SampleSpec, UriSample
from .simarchive import SimCorpus, SynthSpec, generate_synthetic
from .uri_tools import extract_tld, hostify

__version__ = "0.1.0"

__all__ = [
    "AggregationResult",
    "ArchiveEndpoint",
    "ArchiveId",
    "ArchiveProfile",
    "ArchiveRanking",
    "LookupResult",
    "MementoRecord",
    "MemrouteError",
    "OriginalUri",
    "RoutingPolicy",
    "SampleSpec",
    "SimCorpus",
    "SynthSpec",
    "TimeMap",
    "UriSample",
    "__version__",
    "aggregate",
    "build_profile",
    "extract_tld",
    "fetch_timemap",
    "format_success",
    "generate_synthetic",
    "hostify",
    "merge_timemaps",
    "parse_link_format",
    "rank_archives",
    "serialize_link_format",
]
