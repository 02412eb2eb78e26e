# cython: language_level=3
"""Compiled kernels for the link-format hot path.

Mirror of memroute._linkformat (same functions, same contracts); see
that module for documentation. Datetime math is done on integers here
to avoid datetime object churn in tight loops.
"""

from .errors import MalformedLink

cdef frozenset _TOKEN_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyz"
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    "0123456789"
    "!#$%&'*+-.^_`|~"
)

cdef tuple _DAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
# indexed by days-since-epoch mod 7; 1970-01-01 was a Thursday
cdef tuple _DAY_BY_EPOCH_MOD = ("Thu", "Fri", "Sat", "Sun", "Mon", "Tue", "Wed")
cdef tuple _MONTH_NAMES = ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
                           "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")
cdef dict _MONTH_INDEX = {name: i + 1 for i, name in enumerate(_MONTH_NAMES)}


cdef inline bint _is_ws(Py_UCS4 c):
    return c == u' ' or c == u'\t' or c == u'\r' or c == u'\n'


def parse_links(str text):
    """See memroute._linkformat.parse_links."""
    cdef list links = []
    cdef list params
    cdef list buf
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, start, end
    cdef Py_UCS4 ch, c
    cdef bint expect_link = False
    cdef bint closed_by_comma
    cdef str target, name, value
    while True:
        while i < n and _is_ws(text[i]):
            i += 1
        if i >= n:
            if expect_link:
                raise MalformedLink("trailing comma with no link after it")
            break
        if text[i] != u'<':
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
            while i < n and _is_ws(text[i]):
                i += 1
            if i >= n:
                break
            ch = text[i]
            if ch == u',':
                i += 1
                closed_by_comma = True
                break
            if ch != u';':
                raise MalformedLink(f"unexpected character {chr(ch)!r} at offset {i}")
            i += 1
            while i < n and _is_ws(text[i]):
                i += 1
            start = i
            while i < n and text[i] in _TOKEN_CHARS:
                i += 1
            name = text[start:i]
            if not name:
                raise MalformedLink(f"empty parameter name at offset {i}")
            while i < n and _is_ws(text[i]):
                i += 1
            value = ""
            if i < n and text[i] == u'=':
                i += 1
                while i < n and _is_ws(text[i]):
                    i += 1
                if i < n and text[i] == u'"':
                    i += 1
                    buf = []
                    while True:
                        if i >= n:
                            raise MalformedLink("unterminated quoted parameter value")
                        c = text[i]
                        if c == u'\\':
                            if i + 1 >= n:
                                raise MalformedLink("dangling escape in parameter value")
                            buf.append(text[i + 1])
                            i += 2
                        elif c == u'"':
                            i += 1
                            break
                        else:
                            buf.append(text[i])
                            i += 1
                    value = "".join(buf)
                else:
                    start = i
                    while i < n and text[i] != u';' and text[i] != u',' and not _is_ws(text[i]):
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
    """See memroute._linkformat.format_links."""
    cdef list parts = []
    cdef list seg
    cdef str target, name, value
    for target, params in links:
        seg = ["<", target, ">"]
        for name, value in params:
            seg.append('; ')
            seg.append(name)
            seg.append('="')
            seg.append(value.replace("\\", "\\\\").replace('"', '\\"'))
            seg.append('"')
        parts.append("".join(seg))
    return ",\n".join(parts) + "\n"


cdef inline long long _days_from_civil(long long y, long long m, long long d):
    # Gregorian calendar day count relative to 1970-01-01.
    y -= m <= 2
    cdef long long era = (y if y >= 0 else y - 399) // 400
    cdef long long yoe = y - era * 400
    cdef long long mp = (m + 9) % 12
    cdef long long doy = (153 * mp + 2) // 5 + d - 1
    cdef long long doe = yoe * 365 + yoe // 4 - yoe // 100 + doy
    return era * 146097 + doe - 719468


cdef inline bint _is_leap(long long y):
    return (y % 4 == 0 and y % 100 != 0) or y % 400 == 0


cdef int _DAYS_IN_MONTH[12]
_DAYS_IN_MONTH[:] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]


cdef inline bint _all_digits(str s, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t i
    for i in range(lo, hi):
        if not (u'0' <= s[i] <= u'9'):
            return False
    return True


cdef inline long long _to_int(str s, Py_ssize_t lo, Py_ssize_t hi):
    cdef long long v = 0
    cdef Py_ssize_t i
    for i in range(lo, hi):
        v = v * 10 + (<long long>(<Py_UCS4>s[i]) - 48)
    return v


def parse_http_datetime(str value):
    """See memroute._linkformat.parse_http_datetime."""
    # "Sun, 06 Nov 1994 08:49:37 GMT" is exactly 29 characters.
    if (
        len(value) != 29
        or value[3] != u',' or value[4] != u' '
        or value[7] != u' ' or value[11] != u' ' or value[16] != u' '
        or value[19] != u':' or value[22] != u':'
        or value[25:29] != " GMT"
        or value[0:3] not in _DAY_NAMES
        or not _all_digits(value, 5, 7)
        or not _all_digits(value, 12, 16)
        or not _all_digits(value, 17, 19)
        or not _all_digits(value, 20, 22)
        or not _all_digits(value, 23, 25)
    ):
        raise ValueError(f"not an RFC 1123 GMT datetime: {value!r}")
    month_obj = _MONTH_INDEX.get(value[8:11])
    if month_obj is None:
        raise ValueError(f"not an RFC 1123 GMT datetime: {value!r}")
    cdef long long month = <long long>month_obj
    cdef long long day = _to_int(value, 5, 7)
    cdef long long year = _to_int(value, 12, 16)
    cdef long long hour = _to_int(value, 17, 19)
    cdef long long minute = _to_int(value, 20, 22)
    cdef long long second = _to_int(value, 23, 25)
    cdef long long max_day = _DAYS_IN_MONTH[month - 1]
    if month == 2 and _is_leap(year):
        max_day = 29
    if day < 1 or day > max_day or hour > 23 or minute > 59 or second > 59:
        raise ValueError(f"not an RFC 1123 GMT datetime: {value!r}")
    cdef long long days = _days_from_civil(year, month, day)
    return days * 86400 + hour * 3600 + minute * 60 + second


def format_http_datetime(epoch):
    """See memroute._linkformat.format_http_datetime."""
    cdef long long e = <long long>epoch
    cdef long long days = e // 86400
    cdef long long rem = e - days * 86400
    # civil date from day count (Gregorian)
    cdef long long z = days + 719468
    cdef long long era = (z if z >= 0 else z - 146096) // 146097
    cdef long long doe = z - era * 146097
    cdef long long yoe = (doe - doe // 1460 + doe // 36524 - doe // 146096) // 365
    cdef long long y = yoe + era * 400
    cdef long long doy = doe - (365 * yoe + yoe // 4 - yoe // 100)
    cdef long long mp = (5 * doy + 2) // 153
    cdef long long d = doy - (153 * mp + 2) // 5 + 1
    cdef long long m = mp + 3 if mp < 10 else mp - 9
    if m <= 2:
        y += 1
    cdef str day_name = _DAY_BY_EPOCH_MOD[days % 7]
    cdef long long hour = rem // 3600
    cdef long long minute = (rem % 3600) // 60
    cdef long long second = rem % 60
    return (
        f"{day_name}, {d:02d} {_MONTH_NAMES[m - 1]} "
        f"{y:04d} {hour:02d}:{minute:02d}:{second:02d} GMT"
    )


def merge_records(record_lists):
    """See memroute._linkformat.merge_records."""
    cdef set seen = set()
    cdef list out = []
    cdef str uri_m
    for records in record_lists:
        for rec in records:
            uri_m = <str>rec[1]
            if uri_m in seen:
                continue
            seen.add(uri_m)
            out.append(rec)
    out.sort(key=_record_key)
    return out


def _record_key(rec):
    return (rec[0], (<str>rec[1]).encode("utf-8"))
