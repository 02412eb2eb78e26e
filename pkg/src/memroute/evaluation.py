"""Ten-fold cross-validated evaluation of routing policies.

For each fold, archive profiles are built from the other nine folds'
lookup results only, so an evaluated URI never contributes to the
profile that ranks it. Each test URI is then routed, aggregated, and
scored (routed mementos / full mementos, exact rational). Reports carry
both the mean success and the complete-TimeMap fraction (share of URIs
whose routed subset recovered every memento), per fold and overall,
plus a 20-bin success histogram and a seeded random-k baseline.

An excluded archive is removed from the world entirely: it is neither
routed to nor counted in the full TimeMap denominator.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .aggregator import ArchiveEndpoint, aggregate_results, fetch_all
from .errors import AllArchivesFailed, SampleTooSmall
from .model import ArchiveId
from .profiler import LookupResult, build_profiles
from .router import RoutingPolicy, rank_archives
from .sampler import SampleEntry, UriSample
from .simarchive import SimCorpus
from .uri_tools import SuffixSet

HISTOGRAM_BINS = 20


@dataclass(frozen=True)
class FoldAssignment:
    """Ten (by default) disjoint, near-equal entry lists covering a sample."""

    seed: int
    folds: tuple[tuple[SampleEntry, ...], ...]

    def train_entries(self, fold_index: int) -> list[SampleEntry]:
        out: list[SampleEntry] = []
        for i, fold in enumerate(self.folds):
            if i != fold_index:
                out.extend(fold)
        return out


def ten_fold_split(sample: UriSample, seed: int, n_folds: int = 10) -> FoldAssignment:
    """Seeded shuffle then round-robin assignment; fold sizes differ by <= 1."""
    if len(sample) < n_folds:
        raise SampleTooSmall(
            f"sample {sample.name!r} has {len(sample)} entries; need >= {n_folds}"
        )
    entries = list(sample.entries)
    random.Random(f"{seed}:tenfold").shuffle(entries)
    folds: list[list[SampleEntry]] = [[] for _ in range(n_folds)]
    for i, entry in enumerate(entries):
        folds[i % n_folds].append(entry)
    return FoldAssignment(seed, tuple(tuple(f) for f in folds))


@dataclass(frozen=True)
class UriOutcome:
    """Evaluation record for one URI."""

    uri: str
    tld: str | None
    fold: int
    chosen: tuple[str, ...]
    success: Fraction
    routed_count: int
    full_count: int
    vacuous: bool
    fallback: bool


@dataclass(frozen=True)
class FoldSummary:
    fold: int
    size: int
    evaluated: int
    mean_success: Fraction
    complete_fraction: Fraction
    complete: int
    vacuous: int
    failed: int


@dataclass(frozen=True)
class BaselineSummary:
    """Uniform random choice of k archives per URI, same world and folds."""

    k: int
    mean_success: Fraction
    complete_fraction: Fraction
    complete: int
    evaluated: int


@dataclass(frozen=True)
class EvaluationReport:
    policy: RoutingPolicy
    seed: int
    archives: tuple[str, ...]
    sample_name: str
    sample_size: int
    folds: tuple[FoldSummary, ...]
    mean_success: Fraction
    complete_fraction: Fraction
    complete: int
    evaluated: int
    vacuous: int
    failed: int
    histogram: tuple[float, ...]
    baseline: BaselineSummary | None
    per_uri: tuple[UriOutcome, ...]

    def to_json_dict(self, include_per_uri: bool = False) -> dict:
        doc = {
            "policy": {
                "k": self.policy.k,
                "exclude": sorted(self.policy.exclude),
                "fallback_order": list(self.policy.fallback_order),
            },
            "seed": self.seed,
            "archives": list(self.archives),
            "sample": {"name": self.sample_name, "size": self.sample_size},
            "folds": [
                {
                    "fold": f.fold,
                    "size": f.size,
                    "evaluated": f.evaluated,
                    "mean_success": float(f.mean_success),
                    "complete_fraction": float(f.complete_fraction),
                    "complete": f.complete,
                    "vacuous": f.vacuous,
                    "failed": f.failed,
                }
                for f in self.folds
            ],
            "overall": {
                "mean_success": float(self.mean_success),
                "complete_fraction": float(self.complete_fraction),
                "complete": self.complete,
                "evaluated": self.evaluated,
                "vacuous": self.vacuous,
                "failed": self.failed,
            },
            "histogram": {"bins": HISTOGRAM_BINS, "shares": list(self.histogram)},
            "random_baseline": None if self.baseline is None else {
                "k": self.baseline.k,
                "mean_success": float(self.baseline.mean_success),
                "complete_fraction": float(self.baseline.complete_fraction),
                "complete": self.baseline.complete,
                "evaluated": self.baseline.evaluated,
            },
        }
        if include_per_uri:
            doc["per_uri"] = [
                {
                    "uri": o.uri,
                    "tld": o.tld,
                    "fold": o.fold,
                    "chosen": list(o.chosen),
                    "routed": o.routed_count,
                    "full": o.full_count,
                    "success": [o.success.numerator, o.success.denominator],
                    "vacuous": o.vacuous,
                    "fallback": o.fallback,
                }
                for o in self.per_uri
            ]
        return doc


def _as_corpora_map(
    source: Mapping[str, SimCorpus] | Sequence[SimCorpus],
) -> dict[str, SimCorpus]:
    if isinstance(source, Mapping):
        return dict(source)
    return {corpus.archive.id: corpus for corpus in source}


def _collect_lookups(
    sample: UriSample,
    endpoints: Sequence[ArchiveEndpoint],
    corpora: Mapping[str, SimCorpus],
    max_workers: int = 1,
    session=None,
) -> dict[str, dict[str, LookupResult]]:
    """host -> archive id -> result, fetched once for the whole run."""
    table: dict[str, dict[str, LookupResult]] = {}
    for entry in sample.entries:
        results = fetch_all(endpoints, entry.uri, corpora, max_workers, session)
        table[entry.uri.host] = {res.archive.id: res for res in results}
    return table


def _histogram(successes: Sequence[Fraction]) -> tuple[float, ...]:
    counts = [0] * HISTOGRAM_BINS
    for s in successes:
        counts[min(int(s * HISTOGRAM_BINS), HISTOGRAM_BINS - 1)] += 1
    total = len(successes)
    if total == 0:
        return tuple(0.0 for _ in counts)
    return tuple(c / total for c in counts)


def _mean(values: Sequence[Fraction]) -> Fraction:
    if not values:
        return Fraction(0)
    return sum(values, Fraction(0)) / len(values)


def run_evaluation(
    sample: UriSample,
    source: Mapping[str, SimCorpus] | Sequence[SimCorpus] | Sequence[ArchiveEndpoint],
    policy: RoutingPolicy,
    seed: int,
    suffixes: SuffixSet | None = None,
    n_folds: int = 10,
    with_baseline: bool = True,
    max_workers: int = 1,
    session=None,
) -> EvaluationReport:
    """Evaluate one policy; see :func:`run_evaluation_suite` for several."""
    return run_evaluation_suite(
        sample, source, [policy], seed,
        suffixes=suffixes, n_folds=n_folds, with_baseline=with_baseline,
        max_workers=max_workers, session=session,
    )[0]


def run_evaluation_suite(
    sample: UriSample,
    source: Mapping[str, SimCorpus] | Sequence[SimCorpus] | Sequence[ArchiveEndpoint],
    policies: Sequence[RoutingPolicy],
    seed: int,
    suffixes: SuffixSet | None = None,
    n_folds: int = 10,
    with_baseline: bool = True,
    max_workers: int = 1,
    session=None,
) -> list[EvaluationReport]:
    """Evaluate several policies over one shared set of lookups.

    Lookups and fold splits are computed once; per-fold profiles are
    shared across policies (they do not depend on k or on exclusions,
    which only filter the ranking and the merge). Reports come back in
    policy order and are byte-stable for a given (sample, source,
    policies, seed).
    """
    if source and not isinstance(source, Mapping) and isinstance(source[0], ArchiveEndpoint):
        endpoints = list(source)
        corpora = {}
        for ep in endpoints:
            if ep.transport == "sim-corpus":
                if ep.corpus_path is None:
                    raise ValueError(f"sim endpoint {ep.archive.id} has no corpus path")
                from .simarchive import load_corpus
                corpora[ep.archive.id] = load_corpus(ep.corpus_path, ep.archive)
    else:
        corpora = _as_corpora_map(source)  # type: ignore[arg-type]
        endpoints = [
            ArchiveEndpoint(corpus.archive, transport="sim-corpus")
            for _, corpus in sorted(corpora.items())
        ]
    all_archives = sorted(ep.archive.id for ep in endpoints)
    archive_by_id = {ep.archive.id: ep.archive for ep in endpoints}

    folds = ten_fold_split(sample, seed, n_folds)
    lookups = _collect_lookups(sample, endpoints, corpora, max_workers, session)

    # Per-fold training profiles, shared by every policy.
    fold_profiles = []
    for i in range(n_folds):
        train = folds.train_entries(i)
        train_sample = UriSample(f"{sample.name}:train{i}", sample.source_kind, tuple(train))
        train_results = [
            lookups[entry.uri.host][aid]
            for entry in train
            for aid in all_archives
        ]
        profiles = build_profiles(
            [archive_by_id[aid] for aid in all_archives],
            train_results,
            sample=train_sample,
            suffixes=suffixes,
            include_growth=False,
        )
        fold_profiles.append(profiles)

    reports = []
    for policy in policies:
        reports.append(_evaluate_policy(
            sample, policy, seed, folds, fold_profiles, lookups,
            all_archives, archive_by_id, suffixes, with_baseline,
        ))
    return reports


def _evaluate_policy(
    sample: UriSample,
    policy: RoutingPolicy,
    seed: int,
    folds: FoldAssignment,
    fold_profiles: Sequence[Sequence],
    lookups: Mapping[str, Mapping[str, LookupResult]],
    all_archives: Sequence[str],
    archive_by_id: Mapping[str, ArchiveId],
    suffixes: SuffixSet | None,
    with_baseline: bool,
) -> EvaluationReport:
    world = [aid for aid in all_archives if aid not in policy.exclude]
    baseline_rng = random.Random(f"{seed}:baseline:{policy.k}:{','.join(sorted(policy.exclude))}")

    outcomes: list[UriOutcome] = []
    fold_rows: list[FoldSummary] = []
    baseline_successes: list[Fraction] = []
    baseline_complete = 0
    total_failed = 0

    for i, fold in enumerate(folds.folds):
        profiles = [p for p in fold_profiles[i] if p.archive.id not in policy.exclude]
        fold_successes: list[Fraction] = []
        fold_complete = 0
        fold_vacuous = 0
        fold_failed = 0
        for entry in fold:
            ranking = rank_archives(entry.uri, profiles, policy, suffixes)
            world_results = [lookups[entry.uri.host][aid] for aid in world]
            try:
                agg = aggregate_results(entry.uri, world_results, ranking.chosen)
            except AllArchivesFailed:
                fold_failed += 1
                continue
            outcomes.append(UriOutcome(
                uri=entry.uri.value,
                tld=ranking.tld,
                fold=i,
                chosen=tuple(a.id for a in ranking.chosen),
                success=agg.success,
                routed_count=len(agg.routed),
                full_count=len(agg.full),
                vacuous=agg.vacuous,
                fallback=ranking.fallback,
            ))
            fold_successes.append(agg.success)
            fold_complete += agg.success == 1
            fold_vacuous += agg.vacuous

            if with_baseline:
                random_ids = baseline_rng.sample(world, policy.k)
                random_chosen = tuple(archive_by_id[aid] for aid in random_ids)
                try:
                    base = aggregate_results(entry.uri, world_results, random_chosen)
                except AllArchivesFailed:
                    continue
                baseline_successes.append(base.success)
                baseline_complete += base.success == 1

        evaluated = len(fold_successes)
        fold_rows.append(FoldSummary(
            fold=i,
            size=len(fold),
            evaluated=evaluated,
            mean_success=_mean(fold_successes),
            complete_fraction=Fraction(fold_complete, evaluated) if evaluated else Fraction(0),
            complete=fold_complete,
            vacuous=fold_vacuous,
            failed=fold_failed,
        ))
        total_failed += fold_failed

    successes = [o.success for o in outcomes]
    evaluated = len(successes)
    complete = sum(1 for s in successes if s == 1)

    baseline = None
    if with_baseline:
        baseline = BaselineSummary(
            k=policy.k,
            mean_success=_mean(baseline_successes),
            complete_fraction=(
                Fraction(baseline_complete, len(baseline_successes))
                if baseline_successes else Fraction(0)
            ),
            complete=baseline_complete,
            evaluated=len(baseline_successes),
        )

    return EvaluationReport(
        policy=policy,
        seed=seed,
        archives=tuple(world),
        sample_name=sample.name,
        sample_size=len(sample),
        folds=tuple(fold_rows),
        mean_success=_mean(successes),
        complete_fraction=Fraction(complete, evaluated) if evaluated else Fraction(0),
        complete=complete,
        evaluated=evaluated,
        vacuous=sum(1 for o in outcomes if o.vacuous),
        failed=total_failed,
        histogram=_histogram(successes),
        baseline=baseline,
        per_uri=tuple(outcomes),
    )


def summary_tsv(reports: Sequence[EvaluationReport]) -> str:
    """Per-fold summary rows: k, excluded, fold, mean success, complete
    fraction; one trailing "all" row per report."""
    lines = ["k\texcluded\tfold\tmean_success\tcomplete_fraction"]
    for report in reports:
        excluded = ",".join(sorted(report.policy.exclude)) or "-"
        for fold in report.folds:
            lines.append(
                f"{report.policy.k}\t{excluded}\t{fold.fold}"
                f"\t{float(fold.mean_success):.6f}\t{float(fold.complete_fraction):.6f}"
            )
        lines.append(
            f"{report.policy.k}\t{excluded}\tall"
            f"\t{float(report.mean_success):.6f}\t{float(report.complete_fraction):.6f}"
        )
    return "\n".join(lines) + "\n"


def histogram_tsv(reports: Sequence[EvaluationReport]) -> str:
    """20 equal-width success bins per report, normalized."""
    lines = ["k\texcluded\tbin_lo\tbin_hi\tshare"]
    for report in reports:
        excluded = ",".join(sorted(report.policy.exclude)) or "-"
        for b, share in enumerate(report.histogram):
            lo = b / HISTOGRAM_BINS
            hi = (b + 1) / HISTOGRAM_BINS
            lines.append(
                f"{report.policy.k}\t{excluded}\t{lo:.2f}\t{hi:.2f}\t{share:.6f}"
            )
    return "\n".join(lines) + "\n"
