"""Hostname reduction and TLD extraction.

Every sample, profile, and routing decision keys on the host-level URI
(``http://example.org``) and on a TLD label. The default TLD is the
single rightmost DNS label; an optional suffix set enables compound
registrations like ``gc.ca`` or ``co.uk``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable
from urllib.parse import urlsplit

from .errors import NoHost, NoTld
from .model import OriginalUri

# Type alias: a TLD label such as "uk" or, in compound-suffix mode, "gc.ca".
TldLabel = str

_LABEL_RE = re.compile(r"^[a-z0-9-]{1,63}$")


@dataclass(frozen=True)
class Hostname:
    """A validated, lowercased DNS name split into labels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("hostname needs at least one label")
        for label in self.labels:
            if not _LABEL_RE.match(label):
                raise ValueError(f"invalid DNS label: {label!r}")

    @classmethod
    def parse(cls, host: str) -> "Hostname":
        host = host.strip().strip(".").lower()
        if not host:
            raise ValueError("empty hostname")
        return cls(tuple(host.split(".")))

    def __str__(self) -> str:
        return ".".join(self.labels)


def hostify(uri: OriginalUri | str) -> OriginalUri:
    """Reduce a URI to its host-level form ``http://<host>``.

    Lowercases the hostname and drops scheme variation, port, path,
    query, and fragment. Scheme-less inputs like ``example.org`` (a
    directory dump line) are accepted; URIs without a hostname
    (``mailto:``...) raise NoHost. Non-ASCII hostnames are encoded to
    punycode so downstream keys are deterministic bytes. Idempotent.
    """
    raw = uri.value if isinstance(uri, OriginalUri) else uri
    raw = raw.strip()
    if not raw:
        raise NoHost("empty URI")
    parts = urlsplit(raw)
    if parts.hostname is None and _looks_schemeless(raw):
        parts = urlsplit("http://" + raw)
    host = parts.hostname
    if not host:
        raise NoHost(f"no hostname in {raw!r}")
    host = host.strip(".")
    if not host:
        raise NoHost(f"no hostname in {raw!r}")
    if not host.isascii():
        try:
            host = host.encode("idna").decode("ascii")
        except UnicodeError:
            raise NoHost(f"hostname not IDNA-encodable: {host!r}") from None
    return OriginalUri(f"http://{host}")


def _looks_schemeless(raw: str) -> bool:
    # "example.org/x" has no colon before the path; "example.org:8080"
    # has a dotted pre-colon part, unlike real schemes ("mailto:").
    head = raw.split("/", 1)[0]
    if ":" not in head:
        return True
    return "." in head.split(":", 1)[0]


@dataclass(frozen=True)
class SuffixSet:
    """Multi-label public suffixes (a public-suffix-list compatible subset)."""

    suffixes: frozenset[str]

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "SuffixSet":
        entries = set()
        for line in lines:
            line = line.strip().lower()
            if not line or line.startswith("#"):
                continue
            entries.add(line.strip("."))
        return cls(frozenset(entries))

    @classmethod
    def load(cls, path: str | Path) -> "SuffixSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh)

    def longest_match(self, labels: tuple[str, ...]) -> str | None:
        """Longest suffix from the set that is a tail of ``labels``."""
        best = None
        for k in range(1, len(labels) + 1):
            candidate = ".".join(labels[-k:])
            if candidate in self.suffixes:
                best = candidate
        return best


# Common second-level registrations; used only when compound mode is enabled.
DEFAULT_SUFFIXES = SuffixSet.from_lines([
    "gc.ca", "co.uk", "org.uk", "ac.uk", "gov.uk", "me.uk", "net.uk",
    "com.au", "org.au", "net.au", "co.nz", "org.nz", "co.jp", "ne.jp",
    "or.jp", "com.br", "com.cn", "com.tw", "org.tw", "edu.tw",
])


def extract_tld(host: Hostname | str, suffixes: SuffixSet | None = None) -> TldLabel:
    """Return the host's TLD label.

    Default mode returns the rightmost label; passing a SuffixSet
    returns the longest matching compound suffix instead (falling back
    to the rightmost label). Single-label hosts (``localhost``) and
    IP-literal hosts raise NoTld.
    """
    if isinstance(host, str):
        try:
            host = Hostname.parse(host)
        except ValueError as exc:
            raise NoTld(str(exc)) from None
    labels = host.labels
    if len(labels) < 2:
        raise NoTld(f"single-label host has no TLD: {host}")
    if labels[-1].isdigit():
        raise NoTld(f"IP-literal host has no TLD: {host}")
    if suffixes is not None:
        match = suffixes.longest_match(labels)
        if match is not None:
            return match
    return labels[-1]
