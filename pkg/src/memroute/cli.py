"""Command-line entry point.

Subcommands mirror the pipeline: ``synth`` fabricates a simulated
archive federation, ``sample`` builds URI samples, ``profile`` computes
archive profiles and report matrices, ``route`` ranks archives for one
URI, and ``evaluate`` runs the ten-fold routing evaluation.

Exit codes: 0 success, 2 usage or input error, 3 partial failure (some
archives errored but the run completed). Sampling and evaluation
commands require an explicit --seed; given the same inputs and seeds,
every output file is byte-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .config import load_config
from .errors import MemrouteError
from .evaluation import histogram_tsv, run_evaluation_suite, summary_tsv
from .profiler import (
    build_profiles,
    compute_coverage,
    compute_cross_coverage,
    compute_growth,
    compute_language_distribution,
    compute_tld_distribution,
    coverage_tsv,
    cross_coverage_tsv,
    growth_tsv,
    language_distribution_tsv,
    load_profiles,
    save_profiles,
    tld_distribution_tsv,
)
from .router import RoutingPolicy, explain_ranking, rank_archives
from .sampler import (
    SampleSpec,
    ingest_fulltext_results,
    parse_access_log,
    read_language_universe,
    read_sample,
    read_universe,
    sample_controlled_language,
    sample_controlled_tld,
    sample_from_logs,
    sample_random,
    source_counts,
    split_by_source,
    write_sample,
)
from .simarchive import default_spec, default_universe, generate_synthetic, load_corpora, write_corpora
from .uri_tools import SuffixSet

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PARTIAL = 3


def _suffixes(args) -> SuffixSet | None:
    if getattr(args, "suffix_list", None):
        return SuffixSet.load(args.suffix_list)
    return None


def _comma_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


# --- sample -------------------------------------------------------------------

def cmd_sample(args) -> int:
    spec_kwargs = {"rng_seed": args.seed if args.seed is not None else 0}
    if getattr(args, "fraction", None) is not None:
        spec_kwargs["tld_fraction"] = Fraction(args.fraction)
    if getattr(args, "floor", None) is not None:
        spec_kwargs["tld_floor"] = args.floor
    if getattr(args, "per_language", None) is not None:
        spec_kwargs["per_language_count"] = args.per_language
    spec = SampleSpec(**spec_kwargs)

    if args.sample_kind == "random":
        universe = read_universe(args.universe)
        sample = sample_random(universe, args.n, spec, name=args.name)
    elif args.sample_kind == "tld":
        universe = read_universe(args.universe)
        sample = sample_controlled_tld(
            universe, _comma_list(args.tlds), spec,
            name=args.name, suffixes=_suffixes(args),
        )
    elif args.sample_kind == "language":
        universe = read_language_universe(args.universe)
        sample = sample_controlled_language(universe, spec, name=args.name)
    elif args.sample_kind == "fulltext":
        sample = ingest_fulltext_results(args.results, name=args.name)
        for archive_id, count in sorted(source_counts(sample).items()):
            print(f"{archive_id}\t{count}")
    else:  # logs
        def records():
            for path in args.logs:
                with open(path, encoding="utf-8") as fh:
                    yield from parse_access_log(fh)

        sample = sample_from_logs(records(), args.n, spec,
                                  name=args.name, kind=args.kind)

    write_sample(sample, args.out)
    print(f"wrote {len(sample)} entries to {args.out}", file=sys.stderr)
    return EXIT_OK


# --- synth --------------------------------------------------------------------

def cmd_synth(args) -> int:
    universe_pairs = default_universe(args.uris, seed=args.universe_seed)
    spec = default_spec(
        universe=[uri for uri, _ in universe_pairs], seed=args.seed
    )
    if args.collision:
        from dataclasses import replace
        spec = replace(spec, collision_mode=True)
    corpora = generate_synthetic(spec)
    out_dir = Path(args.out_dir)
    manifest_path = write_corpora(corpora, out_dir, spec)

    with open(out_dir / "universe.txt", "w", encoding="utf-8") as fh:
        for uri, _lang in universe_pairs:
            fh.write(uri + "\n")
    with open(out_dir / "languages.tsv", "w", encoding="utf-8") as fh:
        for uri, lang in universe_pairs:
            fh.write(f"{uri}\t{lang}\n")
    config = {
        "archives": [
            {
                "id": corpus.archive.id,
                "name": corpus.archive.display_name,
                "transport": "sim-corpus",
                "corpus": corpus.archive.id + ".tsv",
            }
            for corpus in corpora
        ],
        "seed": args.seed,
    }
    (out_dir / "config.json").write_text(
        json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(corpora)} corpora and {manifest_path}", file=sys.stderr)
    return EXIT_OK


# --- profile ------------------------------------------------------------------

def _gather_results(sample, endpoints, corpora, jobs, suffixes):
    from .evaluation import _collect_lookups

    table = _collect_lookups(sample, endpoints, corpora, max_workers=jobs)
    results = [res for per_host in table.values() for res in per_host.values()]
    failures = sum(1 for res in results if res.outcome in ("timeout", "error"))
    return results, failures


def cmd_profile(args) -> int:
    sample = read_sample(args.sample)
    if len(sample) == 0:
        print("error: sample is empty", file=sys.stderr)
        return EXIT_INPUT
    suffixes = _suffixes(args)
    jobs = args.jobs
    if args.corpus_dir:
        corpora = load_corpora(args.corpus_dir)
        if not corpora:
            print(f"error: no corpora in {args.corpus_dir}", file=sys.stderr)
            return EXIT_INPUT
        from .aggregator import ArchiveEndpoint
        endpoints = [
            ArchiveEndpoint(corpus.archive, transport="sim-corpus")
            for _, corpus in sorted(corpora.items())
        ]
    else:
        config = load_config(args.config)
        endpoints = config.endpoints()
        corpora = config.load_corpora()
        if suffixes is None:
            suffixes = config.suffixes()
        jobs = max(jobs, config.concurrency)

    results, failures = _gather_results(sample, endpoints, corpora, jobs, suffixes)
    archives = [ep.archive for ep in endpoints]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    profiles = build_profiles(archives, results, sample=sample, suffixes=suffixes)
    save_profiles(profiles, out_dir / "profiles.json")

    matrices = set(_comma_list(args.matrix)) if args.matrix else {"coverage"}
    known = {"coverage", "cross", "tld", "language", "growth"}
    unknown = matrices - known
    if unknown:
        print(f"error: unknown matrix kind(s): {sorted(unknown)}", file=sys.stderr)
        return EXIT_INPUT
    if "coverage" in matrices:
        report = compute_coverage(sample, results, archives)
        (out_dir / "coverage.tsv").write_text(coverage_tsv(report), encoding="utf-8")
    if "cross" in matrices:
        by_source = split_by_source(sample)
        if not by_source:
            print("error: cross matrix needs a fulltext sample with source archives",
                  file=sys.stderr)
            return EXIT_INPUT
        matrix = compute_cross_coverage(by_source, results, archives)
        (out_dir / "cross.tsv").write_text(cross_coverage_tsv(matrix), encoding="utf-8")
    if "tld" in matrices:
        dist = compute_tld_distribution(results, suffixes)
        (out_dir / "tld.tsv").write_text(tld_distribution_tsv(dist), encoding="utf-8")
    if "language" in matrices:
        dist = compute_language_distribution(sample, results)
        (out_dir / "language.tsv").write_text(
            language_distribution_tsv(dist), encoding="utf-8"
        )
    if "growth" in matrices:
        series = compute_growth(results)
        (out_dir / "growth.tsv").write_text(growth_tsv(series), encoding="utf-8")

    print(f"wrote profiles for {len(profiles)} archives to {out_dir}", file=sys.stderr)
    if failures:
        print(f"warning: {failures} lookups failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


# --- route --------------------------------------------------------------------

def cmd_route(args) -> int:
    profiles = load_profiles(args.profiles)
    exclude = frozenset(_comma_list(args.exclude)) if args.exclude else frozenset()
    policy = RoutingPolicy(k=args.k, exclude=exclude)
    ranking = rank_archives(args.uri, profiles, policy, _suffixes(args))
    sys.stdout.write(explain_ranking(ranking))
    return EXIT_OK


# --- evaluate -------------------------------------------------------------------

def cmd_evaluate(args) -> int:
    sample = read_sample(args.sample)
    corpora = load_corpora(args.corpus_dir)
    if not corpora:
        print(f"error: no corpora in {args.corpus_dir}", file=sys.stderr)
        return EXIT_INPUT

    ks = [int(k) for k in _comma_list(args.k)]
    exclude = frozenset(_comma_list(args.exclude)) if args.exclude else frozenset()
    policies = []
    for k in ks:
        policies.append(RoutingPolicy(k=k))
        if exclude:
            policies.append(RoutingPolicy(k=k, exclude=exclude))

    reports = run_evaluation_suite(
        sample, corpora, policies, args.seed,
        suffixes=_suffixes(args),
        n_folds=args.folds,
        with_baseline=not args.no_baseline,
        max_workers=args.jobs,
    )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {
        "seed": args.seed,
        "sample": {"name": sample.name, "size": len(sample)},
        "runs": [r.to_json_dict(include_per_uri=args.per_uri) for r in reports],
    }
    (out_dir / "report.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out_dir / "summary.tsv").write_text(summary_tsv(reports), encoding="utf-8")
    (out_dir / "histogram.tsv").write_text(histogram_tsv(reports), encoding="utf-8")

    for report in reports:
        excluded = ",".join(sorted(report.policy.exclude)) or "-"
        print(
            f"k={report.policy.k} excluded={excluded} "
            f"mean_success={float(report.mean_success):.4f} "
            f"complete_fraction={float(report.complete_fraction):.4f}",
            file=sys.stderr,
        )
    return EXIT_OK


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memroute",
        description="Web archive profiling and Memento TimeMap query routing.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    # sample
    p_sample = sub.add_parser("sample", help="build URI samples")
    sample_sub = p_sample.add_subparsers(dest="sample_kind", required=True)

    p = sample_sub.add_parser("random", help="uniform sample from a universe file")
    p.add_argument("universe")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="random")
    p.set_defaults(func=cmd_sample)

    p = sample_sub.add_parser("tld", help="controlled per-TLD sample")
    p.add_argument("universe")
    p.add_argument("--tlds", required=True, help="comma-separated TLD labels")
    p.add_argument("--fraction", default=None, help="per-TLD share (default 0.02)")
    p.add_argument("--floor", type=int, default=None, help="per-TLD minimum (default 100)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--suffix-list")
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="tld")
    p.set_defaults(func=cmd_sample)

    p = sample_sub.add_parser("language", help="controlled per-language sample")
    p.add_argument("universe", help="uri<TAB>lang file")
    p.add_argument("--per-language", type=int, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="language")
    p.set_defaults(func=cmd_sample)

    p = sample_sub.add_parser("fulltext", help="ingest fulltext-search result files")
    p.add_argument("results", nargs="+",
                   help="archive<TAB>query<TAB>rank<TAB>uri files")
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="fulltext")
    p.set_defaults(func=cmd_sample, seed=None)

    p = sample_sub.add_parser("logs", help="sample originals from access logs")
    p.add_argument("logs", nargs="+", help="common/combined log files")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--kind", choices=["wayback_log", "aggregator_log"],
                   default="wayback_log")
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="logs")
    p.set_defaults(func=cmd_sample)

    # synth
    p = sub.add_parser("synth", help="generate the simulated archive federation")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--uris", type=int, default=2000)
    p.add_argument("--universe-seed", type=int, default=7)
    p.add_argument("--collision", action="store_true",
                   help="mint shared memento URIs across archives")
    p.set_defaults(func=cmd_synth)

    # profile
    p = sub.add_parser("profile", help="compute archive profiles and matrices")
    p.add_argument("--sample", required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--corpus-dir")
    source.add_argument("--config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--matrix", default="coverage",
                   help="comma list of coverage,cross,tld,language,growth")
    p.add_argument("--suffix-list")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_profile)

    # route
    p = sub.add_parser("route", help="rank archives for one URI")
    p.add_argument("--profiles", required=True, help="profiles.json")
    p.add_argument("--uri", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--exclude", default="")
    p.add_argument("--suffix-list")
    p.set_defaults(func=cmd_route)

    # evaluate
    p = sub.add_parser("evaluate", help="ten-fold routing evaluation")
    p.add_argument("--sample", required=True)
    p.add_argument("--corpus-dir", required=True)
    p.add_argument("--k", default="3,6,9", help="comma list of k values")
    p.add_argument("--exclude", default="",
                   help="also run each k with these archives removed")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--no-baseline", action="store_true")
    p.add_argument("--per-uri", action="store_true",
                   help="include per-URI records in report.json")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--suffix-list")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except MemrouteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
