"""Pure-Python kernels for the link-format hot path.

The same five functions exist in the optional compiled extension
``memroute._speedups``; ``memroute.kernels`` picks one backend at import
time. Both backends work on plain data only (str, int, tuples) so they
stay interchangeable:

* ``parse_links``        link-format text -> [(target, [(name, value), ...])]
* ``format_links``       the inverse, canonical emission
* ``parse_http_datetime``  RFC 1123 GMT string -> epoch seconds
* ``format_http_datetime`` epoch seconds -> RFC 1123 GMT string
* ``merge_records``      dedup-by-uri_m + canonical sort of record tuples

A record tuple is ``(epoch_seconds, uri_m, attribution)`` where the
attribution slot is passed through untouched.
"""

from __future__ import annotations

import re
from datetime import datetime, timedelta, timezone

from .errors import MalformedLink

_WS = " \t\r\n"
_TOKEN_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyz"
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    "0123456789"
    "!#$%&'*+-.^_`|~"
)

_DAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_MONTH_NAMES = ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
                "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")
_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

_RFC1123_RE = re.compile(
    r"^(Mon|Tue|Wed|Thu|Fri|Sat|Sun), "
    r"(\d{2}) (Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Oct|Nov|Dec) (\d{4}) "
    r"(\d{2}):(\d{2}):(\d{2}) GMT$"
)
_MONTH_INDEX = {name: i + 1 for i, name in enumerate(_MONTH_NAMES)}


def parse_links(text):
    """Split link-format text into (target, params) pairs.

    Parameter names are lowercased; values are unquoted and unescaped.
    Raises MalformedLink on any grammar violation. Returns [] for an
    empty body; semantic checks (original present, datetimes valid) are
    the caller's job.
    """
    links = []
    n = len(text)
    i = 0
    expect_link = False
    while True:
        while i < n and text[i] in _WS:
            i += 1
        if i >= n:
            if expect_link:
                raise MalformedLink("trailing comma with no link after it")
            break
        if text[i] != "<":
            raise MalformedLink(f"expected '<' at offset {i}")
        end = text.find(">", i + 1)
        if end < 0:
            raise MalformedLink(f"unterminated link target at offset {i}")
        target = text[i + 1:end]
        if not target:
            raise MalformedLink(f"empty link target at offset {i}")
        i = end + 1
        params = []
        closed_by_comma = False
        while True:
            while i < n and text[i] in _WS:
                i += 1
            if i >= n:
                break
            ch = text[i]
            if ch == ",":
                i += 1
                closed_by_comma = True
                break
            if ch != ";":
                raise MalformedLink(f"unexpected character {ch!r} at offset {i}")
            i += 1
            while i < n and text[i] in _WS:
                i += 1
            start = i
            while i < n and text[i] in _TOKEN_CHARS:
                i += 1
            name = text[start:i]
            if not name:
                raise MalformedLink(f"empty parameter name at offset {i}")
            while i < n and text[i] in _WS:
                i += 1
            value = ""
            if i < n and text[i] == "=":
                i += 1
                while i < n and text[i] in _WS:
                    i += 1
                if i < n and text[i] == '"':
                    i += 1
                    buf = []
                    while True:
                        if i >= n:
                            raise MalformedLink("unterminated quoted parameter value")
                        c = text[i]
                        if c == "\\":
                            if i + 1 >= n:
                                raise MalformedLink("dangling escape in parameter value")
                            buf.append(text[i + 1])
                            i += 2
                        elif c == '"':
                            i += 1
                            break
                        else:
                            buf.append(c)
                            i += 1
                    value = "".join(buf)
                else:
                    start = i
                    while i < n and text[i] not in ";," and text[i] not in _WS:
                        i += 1
                    value = text[start:i]
                    if not value:
                        raise MalformedLink(f"empty parameter value at offset {i}")
            params.append((name.lower(), value))
        links.append((target, params))
        expect_link = closed_by_comma
        if not closed_by_comma:
            break
    return links


def format_links(links):
    """Emit links canonically: one per line, all values quoted."""
    parts = []
    for target, params in links:
        seg = ["<", target, ">"]
        for name, value in params:
            escaped = value.replace("\\", "\\\\").replace('"', '\\"')
            seg.append(f'; {name}="{escaped}"')
        parts.append("".join(seg))
    return ",\n".join(parts) + "\n"


def parse_http_datetime(value):
    """Parse a strict RFC 1123 GMT datetime to epoch seconds."""
    m = _RFC1123_RE.match(value)
    if m is None:
        raise ValueError(f"not an RFC 1123 GMT datetime: {value!r}")
    day = int(m.group(2))
    month = _MONTH_INDEX[m.group(3)]
    year = int(m.group(4))
    hour, minute, second = int(m.group(5)), int(m.group(6)), int(m.group(7))
    # datetime() validates the day-of-month (incl. leap years) and h/m/s.
    dt = datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)
    return int((dt - _EPOCH).total_seconds())


def format_http_datetime(epoch):
    """Render epoch seconds as an RFC 1123 GMT datetime."""
    dt = _EPOCH + timedelta(seconds=epoch)
    return (
        f"{_DAY_NAMES[dt.weekday()]}, {dt.day:02d} {_MONTH_NAMES[dt.month - 1]} "
        f"{dt.year:04d} {dt.hour:02d}:{dt.minute:02d}:{dt.second:02d} GMT"
    )


def _record_key(rec):
    return (rec[0], rec[1].encode("utf-8"))


def merge_records(record_lists):
    """Union record tuples, first occurrence of a uri_m wins, then sort.

    Sort order is (epoch, uri_m as UTF-8 bytes), the canonical TimeMap
    ordering.
    """
    seen = set()
    out = []
    for records in record_lists:
        for rec in records:
            uri_m = rec[1]
            if uri_m in seen:
                continue
            seen.add(uri_m)
            out.append(rec)
    out.sort(key=_record_key)
    return out
