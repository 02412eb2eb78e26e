"""Sample construction from directories, fulltext results, and logs."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memroute.errors import (
    EmptyUniverse,
    MalformedRow,
    NoExtractableRequests,
    UnknownTld,
)
from memroute.model import ArchiveId, OriginalUri
from memroute.sampler import (
    AccessLogRecord,
    SampleEntry,
    SampleSpec,
    UriSample,
    classify_request,
    controlled_tld_count,
    ingest_fulltext_results,
    parse_access_log,
    read_sample,
    sample_controlled_language,
    sample_controlled_tld,
    sample_from_logs,
    sample_random,
    source_counts,
    split_by_source,
    write_sample,
)


def hosts(n, tld="com", prefix="h"):
    return [f"http://{prefix}{i:05d}.{tld}" for i in range(n)]


class TestUriSampleInvariants:
    def test_rejects_duplicate_host(self):
        entries = (SampleEntry(OriginalUri("http://a.com")),
                   SampleEntry(OriginalUri("http://a.com")))
        with pytest.raises(ValueError):
            UriSample("s", "directory_random", entries)

    def test_rejects_unhostified_entry(self):
        with pytest.raises(ValueError):
            UriSample("s", "directory_random",
                      (SampleEntry(OriginalUri("http://a.com/path")),))

    def test_same_host_different_sources_allowed(self):
        entries = (
            SampleEntry(OriginalUri("http://a.com"), source_archive=ArchiveId("X")),
            SampleEntry(OriginalUri("http://a.com"), source_archive=ArchiveId("Y")),
        )
        sample = UriSample("s", "fulltext", entries)
        assert len(sample) == 2

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            UriSample("s", "nonsense", ())


class TestSampleSpec:
    def test_fraction_is_exact(self):
        spec = SampleSpec(rng_seed=1, tld_fraction=0.02)
        assert spec.tld_fraction == Fraction(1, 50)

    @pytest.mark.parametrize("bad", [{"tld_fraction": 0}, {"tld_fraction": 1.5},
                                     {"tld_floor": 0}, {"per_language_count": 0}])
    def test_validation(self, bad):
        with pytest.raises(ValueError):
            SampleSpec(rng_seed=1, **bad)


class TestSampleRandom:
    def test_large_universe_gets_exactly_n(self):
        universe = hosts(12_000)
        sample = sample_random(universe, 10_000, SampleSpec(rng_seed=3))
        assert len(sample) == 10_000
        assert len(sample.hosts()) == 10_000

    def test_capped_at_availability(self):
        sample = sample_random(hosts(3), 10, SampleSpec(rng_seed=3))
        assert len(sample) == 3

    def test_deterministic_and_order_independent(self):
        universe = hosts(500)
        a = sample_random(universe, 50, SampleSpec(rng_seed=9))
        b = sample_random(list(reversed(universe)), 50, SampleSpec(rng_seed=9))
        assert a == b
        c = sample_random(universe, 50, SampleSpec(rng_seed=10))
        assert c != a

    def test_dedup_happens_before_sampling(self):
        universe = ["http://a.com/x", "http://a.com/y", "a.com", "http://b.com"]
        sample = sample_random(universe, 10, SampleSpec(rng_seed=1))
        assert sample.hosts() == {"a.com", "b.com"}

    def test_empty_universe(self):
        with pytest.raises(EmptyUniverse):
            sample_random(["mailto:a@b.c"], 5, SampleSpec(rng_seed=1))


class TestControlledTld:
    @pytest.mark.parametrize("available,expected", [
        (10_000, 200),   # 2% dominates
        (1_000, 100),    # floor dominates
        (60, 60),        # capped at availability
        (99, 99),
        (100, 100),
        (101, 100),
        (5_000, 100),
        (5_001, 101),    # ceil(100.02) = 101
    ])
    def test_count_rule(self, available, expected):
        assert controlled_tld_count(available, SampleSpec(rng_seed=1)) == expected

    @given(st.integers(min_value=1, max_value=200_000))
    @settings(max_examples=300, deadline=None)
    def test_count_rule_brute_force(self, available):
        import math
        spec = SampleSpec(rng_seed=1)
        expected = min(available, max(math.ceil(available / 50), 100))
        assert controlled_tld_count(available, spec) == expected

    def test_selection_and_labels(self):
        universe = hosts(10_000, "uk") + hosts(1_000, "ca") + hosts(60, "cat")
        sample = sample_controlled_tld(universe, ["uk", "ca", "cat"], SampleSpec(rng_seed=5))
        by_tld = {}
        for entry in sample.entries:
            assert entry.tld is not None
            by_tld[entry.tld] = by_tld.get(entry.tld, 0) + 1
        assert by_tld == {"uk": 200, "ca": 100, "cat": 60}

    def test_unknown_tld_warns_but_continues(self, caplog):
        universe = hosts(150, "uk")
        with caplog.at_level("WARNING"):
            sample = sample_controlled_tld(universe, ["uk", "zz"], SampleSpec(rng_seed=5))
        assert len(sample) == 100
        assert any("zz" in message for message in caplog.messages)

    def test_unknown_tld_strict(self):
        with pytest.raises(UnknownTld):
            sample_controlled_tld(hosts(5, "uk"), ["zz"], SampleSpec(rng_seed=5),
                                  strict=True)

    def test_deterministic(self):
        universe = hosts(300, "uk") + hosts(300, "ca")
        a = sample_controlled_tld(universe, ["uk", "ca"], SampleSpec(rng_seed=5))
        b = sample_controlled_tld(universe, ["uk", "ca"], SampleSpec(rng_seed=5))
        assert a == b


class TestControlledLanguage:
    def test_23_languages_give_2300(self):
        universe = []
        for i in range(23):
            lang = f"l{i:02d}"
            universe.extend((uri, lang) for uri in hosts(120, "com", prefix=lang))
        sample = sample_controlled_language(universe, SampleSpec(rng_seed=2))
        assert len(sample) == 2300

    def test_small_slice_capped(self):
        universe = [(uri, "ca") for uri in hosts(40, "cat")]
        sample = sample_controlled_language(universe, SampleSpec(rng_seed=2))
        assert len(sample) == 40
        assert all(e.language == "ca" for e in sample.entries)

    def test_deterministic(self):
        universe = [(uri, "en") for uri in hosts(250)]
        a = sample_controlled_language(universe, SampleSpec(rng_seed=2))
        b = sample_controlled_language(universe, SampleSpec(rng_seed=2))
        assert a == b

    def test_empty(self):
        with pytest.raises(EmptyUniverse):
            sample_controlled_language([], SampleSpec(rng_seed=2))


class TestFulltextIngestion:
    def test_rank_rows_same_host_dedup(self, tmp_path):
        path = tmp_path / "results.tsv"
        rows = [f"AIT\tterm\t{rank}\thttp://one.example/r{rank}" for rank in range(1, 11)]
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        sample = ingest_fulltext_results([path])
        assert len(sample) == 1
        assert sample.entries[0].uri.value == "http://one.example"

    def test_hostify_and_source_tagging(self, tmp_path):
        path = tmp_path / "results.tsv"
        path.write_text("PO\tq\t1\thttp://a.pt/x/y\n", encoding="utf-8")
        sample = ingest_fulltext_results([path])
        entry = sample.entries[0]
        assert entry.uri.value == "http://a.pt"
        assert entry.source_archive == ArchiveId("PO")

    def test_counts_match_one_pass_oracle(self, tmp_path):
        # oracle: independent one-pass unique-host count over the file
        path = tmp_path / "results.tsv"
        lines = []
        import random
        rng = random.Random(77)
        for i in range(400):
            archive = rng.choice(["A1", "B2", "C3"])
            host = f"h{rng.randrange(120):03d}.example"
            lines.append(f"{archive}\tq{i}\t{i % 10 + 1}\thttp://{host}/p{i}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        expected: dict[str, set[str]] = {}
        for line in lines:
            archive, _q, _r, uri = line.split("\t")
            expected.setdefault(archive, set()).add(uri.split("/")[2])

        sample = ingest_fulltext_results([path])
        assert source_counts(sample) == {a: len(s) for a, s in expected.items()}

    def test_malformed_rows_skipped_with_warning(self, tmp_path, caplog):
        path = tmp_path / "results.tsv"
        path.write_text(
            "A1\tq\t1\thttp://ok.example/x\n"
            "not\tenough\n"
            "A1\tq\t99\thttp://rank.example/\n"
            "A1\tq\tNaN\thttp://badrank.example/\n"
            "A1\tq\t2\tmailto:nobody@example\n",
            encoding="utf-8",
        )
        with caplog.at_level("WARNING"):
            sample = ingest_fulltext_results([path])
        assert len(sample) == 1
        assert len(caplog.messages) == 4

    def test_split_by_source(self, tmp_path):
        path = tmp_path / "results.tsv"
        path.write_text(
            "A1\tq\t1\thttp://x.example/\n"
            "B2\tq\t1\thttp://x.example/\n"
            "B2\tq\t2\thttp://y.example/\n",
            encoding="utf-8",
        )
        groups = split_by_source(ingest_fulltext_results([path]))
        assert {k: len(v) for k, v in groups.items()} == {"A1": 1, "B2": 2}


LOG_LINE = (
    '203.0.113.9 - - [22/Feb/2012:10:00:{sec:02d} +0000] '
    '"GET {path} HTTP/1.1" 200 1234 "-" "test-agent"'
)


class TestLogs:
    def test_memento_path_extraction(self):
        rec = classify_request("/web/20120222000000/http://x.org/p")
        assert rec.kind == "memento"
        assert rec.original == "http://x.org/p"

    def test_bare_timestamp_path(self):
        rec = classify_request("/20120222000000/http://x.org/")
        assert rec.kind == "memento"

    def test_timemap_path_extraction(self):
        rec = classify_request("/timemap/link/http://x.org/p")
        assert rec.kind == "timemap"
        assert rec.original == "http://x.org/p"

    def test_other_ignored(self):
        assert classify_request("/robots.txt").kind == "other"

    def test_parse_access_log(self):
        lines = [
            LOG_LINE.format(sec=0, path="/web/20120222000000/http://x.org/p"),
            LOG_LINE.format(sec=1, path="/robots.txt"),
            "garbage line",
            LOG_LINE.format(sec=2, path="/timemap/link/http://y.org/"),
        ]
        records = list(parse_access_log(lines))
        assert [r.kind for r in records] == ["memento", "other", "timemap"]
        assert records[0].timestamp is not None
        assert records[0].timestamp.year == 2012

    def test_sample_from_logs(self):
        records = [
            AccessLogRecord(None, f"/web/20120222000000/http://h{i:04d}.org/p",
                            "memento", f"http://h{i:04d}.org/p")
            for i in range(1500)
        ] + [AccessLogRecord(None, "/robots.txt", "other")]
        sample = sample_from_logs(records, 1000, SampleSpec(rng_seed=4))
        assert len(sample) == 1000
        assert sample.source_kind == "wayback_log"

    def test_no_extractable_requests(self):
        with pytest.raises(NoExtractableRequests):
            sample_from_logs([AccessLogRecord(None, "/robots.txt", "other")],
                             10, SampleSpec(rng_seed=4))


class TestSampleFiles:
    def test_round_trip(self, tmp_path):
        entries = (
            SampleEntry(OriginalUri("http://a.com"), tld="com"),
            SampleEntry(OriginalUri("http://b.cat"), tld="cat", language="ca"),
            SampleEntry(OriginalUri("http://c.uk"), source_archive=ArchiveId("BL")),
        )
        sample = UriSample("mix", "fulltext", entries)
        path = tmp_path / "sample.tsv"
        write_sample(sample, path)
        text = path.read_text(encoding="utf-8")
        assert text.endswith("\n")
        assert text.splitlines()[0] == "http://a.com\tcom\t\t"
        back = read_sample(path, name="mix", kind="fulltext")
        assert back == sample

    def test_kind_inference(self, tmp_path):
        path = tmp_path / "sample.tsv"
        path.write_text("http://a.cat\t\tca\t\n", encoding="utf-8")
        assert read_sample(path).source_kind == "directory_language"
        path.write_text("http://a.cat\tcat\t\t\n", encoding="utf-8")
        assert read_sample(path).source_kind == "directory_tld"
        path.write_text("http://a.cat\t\t\t\n", encoding="utf-8")
        assert read_sample(path).source_kind == "directory_random"

    def test_malformed_row_reports_line(self, tmp_path):
        path = tmp_path / "sample.tsv"
        path.write_text("http://a.com\tonly-two\n", encoding="utf-8")
        with pytest.raises(MalformedRow) as exc_info:
            read_sample(path)
        assert exc_info.value.line_no == 1
