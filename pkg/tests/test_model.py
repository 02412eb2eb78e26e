"""TimeMap types, codec, and merge semantics."""

from __future__ import annotations

from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memroute.errors import (
    BadDatetime,
    MalformedLink,
    MissingOriginal,
    MixedOriginals,
)
from memroute.model import (
    ArchiveId,
    MementoRecord,
    OriginalUri,
    TimeMap,
    merge_timemaps,
    parse_link_format,
    serialize_link_format,
)


def utc(y, mo, d, h=0, mi=0, s=0):
    return datetime(y, mo, d, h, mi, s, tzinfo=timezone.utc)


def record(uri_m, dt, archive=None):
    return MementoRecord(uri_m, dt, ArchiveId(archive) if archive else None)


class TestTypes:
    def test_archive_id_equality_ignores_display_name(self):
        assert ArchiveId("IA", "Internet Archive") == ArchiveId("IA")
        assert ArchiveId("IA") != ArchiveId("PO")

    @pytest.mark.parametrize("bad", ["", "has space", "slash/", "ütf"])
    def test_archive_id_rejects_bad_tokens(self, bad):
        with pytest.raises(ValueError):
            ArchiveId(bad)

    @pytest.mark.parametrize("bad", ["", "mailto:a@b.c", "nohost", "http://"])
    def test_original_uri_requires_hostname(self, bad):
        with pytest.raises(ValueError):
            OriginalUri(bad)

    def test_memento_record_normalizes_to_utc_seconds(self):
        from datetime import timedelta, timezone as tz
        plus2 = tz(timedelta(hours=2))
        rec = MementoRecord("m", datetime(2001, 1, 1, 2, 0, 0, 500_000, tzinfo=plus2))
        assert rec.datetime == utc(2001, 1, 1, 0, 0, 0)

    def test_memento_record_rejects_naive_datetime(self):
        with pytest.raises(ValueError):
            MementoRecord("m", datetime(2001, 1, 1))

    def test_timemap_rejects_duplicates_and_disorder(self):
        orig = OriginalUri("http://a.example")
        r1 = record("m1", utc(2001, 1, 1))
        r2 = record("m2", utc(2002, 1, 1))
        with pytest.raises(ValueError):
            TimeMap(orig, (r2, r1))
        with pytest.raises(ValueError):
            TimeMap(orig, (r1, record("m1", utc(2002, 1, 1))))

    def test_timemap_build_normalizes(self):
        orig = OriginalUri("http://a.example")
        r1 = record("m1", utc(2001, 1, 1))
        r2 = record("m2", utc(2000, 1, 1))
        tm = TimeMap.build(orig, [r1, r2, record("m1", utc(2005, 1, 1))])
        assert tm.mementos == (r2, r1)


class TestParse:
    def test_minimal_grammar_case(self):
        body = (
            b'<http://a.example/>; rel="original", '
            b'<http://arc.example/1/http://a.example/>; rel="memento"; '
            b'datetime="Mon, 01 Jan 2001 00:00:00 GMT"'
        )
        tm = parse_link_format(body)
        assert tm.original.value == "http://a.example/"
        assert len(tm) == 1
        assert tm.mementos[0].uri_m == "http://arc.example/1/http://a.example/"
        assert tm.mementos[0].datetime == utc(2001, 1, 1)

    def test_original_only_gives_empty_timemap(self):
        tm = parse_link_format(b'<http://a.example/>; rel="original"')
        assert tm.original.value == "http://a.example/"
        assert len(tm) == 0

    def test_duplicate_uri_m_keeps_first_parsed_datetime(self):
        body = (
            '<http://a.example/>; rel="original",\n'
            '<http://arc.example/m>; rel="memento"; datetime="Tue, 02 Jan 2001 00:00:00 GMT",\n'
            '<http://arc.example/m>; rel="memento"; datetime="Mon, 01 Jan 2001 00:00:00 GMT"'
        )
        tm = parse_link_format(body)
        assert len(tm) == 1
        assert tm.mementos[0].datetime == utc(2001, 1, 2)

    def test_self_and_timegate_rels_ignored(self):
        body = (
            '<http://a.example/>; rel="original",\n'
            '<http://agg.example/tm>; rel="self",\n'
            '<http://agg.example/tg>; rel="timegate",\n'
            '<http://arc.example/m>; rel="memento first"; datetime="Mon, 01 Jan 2001 00:00:00 GMT"'
        )
        tm = parse_link_format(body)
        assert [r.uri_m for r in tm.mementos] == ["http://arc.example/m"]

    def test_default_attribution_and_archive_param(self):
        body = (
            '<http://a.example/>; rel="original",\n'
            '<http://arc.example/m1>; rel="memento"; datetime="Mon, 01 Jan 2001 00:00:00 GMT",\n'
            '<http://arc.example/m2>; rel="memento"; datetime="Mon, 01 Jan 2001 00:00:00 GMT"; archive="PO"'
        )
        tm = parse_link_format(body, archive=ArchiveId("IA"))
        by_uri = {r.uri_m: r.archive for r in tm.mementos}
        assert by_uri["http://arc.example/m1"] == ArchiveId("IA")
        assert by_uri["http://arc.example/m2"] == ArchiveId("PO")

    def test_missing_original(self):
        with pytest.raises(MissingOriginal):
            parse_link_format(
                '<http://arc.example/m>; rel="memento"; datetime="Mon, 01 Jan 2001 00:00:00 GMT"'
            )
        with pytest.raises(MissingOriginal):
            parse_link_format(b"")

    def test_two_originals_is_malformed(self):
        with pytest.raises(MalformedLink):
            parse_link_format(
                '<http://a.example/>; rel="original", <http://b.example/>; rel="original"'
            )

    def test_bad_datetime(self):
        with pytest.raises(BadDatetime):
            parse_link_format(
                '<http://a.example/>; rel="original", '
                '<http://arc.example/m>; rel="memento"; datetime="yesterday"'
            )
        with pytest.raises(BadDatetime):
            parse_link_format(
                '<http://a.example/>; rel="original", '
                '<http://arc.example/m>; rel="memento"'
            )

    def test_invalid_utf8_is_malformed(self):
        with pytest.raises(MalformedLink):
            parse_link_format(b"<http://a.example/>; rel=\xff\xfe")


class TestSerialize:
    def test_empty_timemap_single_original_link(self):
        tm = TimeMap(OriginalUri("http://a.example"))
        assert serialize_link_format(tm) == b'<http://a.example>; rel="original"\n'

    def test_two_mementos_ascending(self):
        tm = TimeMap.build(OriginalUri("http://a.example"), [
            record("http://arc/2", utc(2002, 2, 2), "IA"),
            record("http://arc/1", utc(2001, 1, 1)),
        ])
        out = serialize_link_format(tm).decode()
        lines = out.splitlines()
        assert len(lines) == 3
        assert lines[0] == '<http://a.example>; rel="original",'
        assert lines[1] == '<http://arc/1>; rel="memento"; datetime="Mon, 01 Jan 2001 00:00:00 GMT",'
        assert lines[2] == '<http://arc/2>; rel="memento"; datetime="Sat, 02 Feb 2002 00:00:00 GMT"; archive="IA"'
        assert out.endswith("\n")

    def test_round_trip_hand_case(self):
        tm = TimeMap.build(OriginalUri("http://a.example/path"), [
            record("http://arc/1", utc(1996, 10, 1, 8, 30, 59), "wide"),
            record("http://arc/2", utc(1996, 10, 1, 8, 30, 59)),
            record("http://arc/3", utc(2014, 12, 31, 23, 59, 59), "PO"),
        ])
        assert parse_link_format(serialize_link_format(tm)) == tm


_archives = st.one_of(st.none(), st.sampled_from(["IA", "PO", "wide", "a-b_1"]))
_uri_ms = st.text(alphabet="abcdefghij0123456789:/._-%", min_size=1, max_size=30)
_epochs = st.integers(min_value=-2_000_000_000, max_value=4_000_000_000)


@st.composite
def timemaps(draw):
    host = draw(st.sampled_from(["a.example", "b.example", "xn--bcher-kva.example"]))
    path = draw(st.sampled_from(["", "/", "/x/y.html", "/q?a=1"]))
    records = draw(st.lists(st.tuples(_uri_ms, _epochs, _archives), max_size=8))
    from memroute.model import _from_epoch
    return TimeMap.build(
        OriginalUri(f"http://{host}{path}"),
        [
            MementoRecord(u, _from_epoch(e), ArchiveId(a) if a else None)
            for u, e, a in records
        ],
    )


class TestProperties:
    @given(timemaps())
    @settings(max_examples=200, deadline=None)
    def test_round_trip(self, tm):
        assert parse_link_format(serialize_link_format(tm)) == tm

    @given(timemaps())
    @settings(max_examples=100, deadline=None)
    def test_merge_identity_and_idempotence(self, tm):
        assert merge_timemaps([tm]) == tm
        assert merge_timemaps([tm, tm]) == tm

    @given(st.lists(timemaps(), min_size=1, max_size=4))
    @settings(max_examples=100, deadline=None)
    def test_merge_size_bound(self, maps):
        host = maps[0].original.host
        same = [m for m in maps if m.original.host == host]
        merged = merge_timemaps(same)
        assert len(merged) <= sum(len(m) for m in same)
        all_uri_ms = [r.uri_m for m in same for r in m.mementos]
        if len(set(all_uri_ms)) == len(all_uri_ms):
            assert len(merged) == len(all_uri_ms)

    @given(st.permutations(list(range(4))))
    @settings(deadline=None)
    def test_merge_memento_set_commutative(self, order):
        orig = OriginalUri("http://a.example")
        maps = [
            TimeMap.build(orig, [record(f"m{i}{j}", utc(2001, 1, 1 + j), "IA")
                                 for j in range(3)])
            for i in range(4)
        ]
        baseline = {r.uri_m for r in merge_timemaps(maps).mementos}
        permuted = merge_timemaps([maps[i] for i in order])
        assert {r.uri_m for r in permuted.mementos} == baseline


class TestMerge:
    def test_disjoint_union(self):
        orig = OriginalUri("http://a.example")
        a = TimeMap.build(orig, [record(f"a{i}", utc(2001, 1, 1 + i)) for i in range(10)])
        b = TimeMap.build(orig, [record(f"b{i}", utc(2002, 1, 1 + i)) for i in range(5)])
        assert len(merge_timemaps([a, b])) == 15

    def test_shared_uri_m_counted_once(self):
        orig = OriginalUri("http://a.example")
        a = TimeMap.build(orig, [record("shared", utc(2001, 1, 1)), record("a1", utc(2001, 2, 1))])
        b = TimeMap.build(orig, [record("shared", utc(2001, 1, 1)), record("b1", utc(2001, 3, 1))])
        assert len(merge_timemaps([a, b])) == 3

    def test_first_occurrence_wins_attribution(self):
        orig = OriginalUri("http://a.example")
        a = TimeMap.build(orig, [record("shared", utc(2001, 1, 1), "IA")])
        b = TimeMap.build(orig, [record("shared", utc(2001, 1, 1), "PO")])
        assert merge_timemaps([a, b]).mementos[0].archive == ArchiveId("IA")
        assert merge_timemaps([b, a]).mementos[0].archive == ArchiveId("PO")

    def test_mixed_originals(self):
        a = TimeMap(OriginalUri("http://a.example"))
        b = TimeMap(OriginalUri("http://b.example"))
        with pytest.raises(MixedOriginals):
            merge_timemaps([a, b])

    def test_same_host_different_paths_merge(self):
        a = TimeMap(OriginalUri("http://a.example/x"))
        b = TimeMap(OriginalUri("http://A.EXAMPLE/y"))
        merged = merge_timemaps([a, b])
        assert merged.original == a.original

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            merge_timemaps([])
