"""Kernel backend selection.

Imports the compiled extension when available, otherwise the pure-Python
twin. Set MEMROUTE_PURE=1 before import to force the pure backend (the
benchmark and the parity tests load both explicitly).
"""

from __future__ import annotations

import os

from . import _linkformat as _pure

if os.environ.get("MEMROUTE_PURE"):
    _impl = _pure
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND = "pure" if _impl is _pure else "compiled"

parse_links = _impl.parse_links
format_links = _impl.format_links
parse_http_datetime = _impl.parse_http_datetime
format_http_datetime = _impl.format_http_datetime
merge_records = _impl.merge_records


def available_backends():
    """Map of backend name -> module, for benchmarks and parity tests."""
    backends = {"pure": _pure}
    try:
        from . import _speedups
        backends["compiled"] = _speedups
    except ImportError:
        pass
    return backends
