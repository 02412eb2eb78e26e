"""Exception types shared across the toolkit."""

from __future__ import annotations


class MemrouteError(Exception):
    """Base class for all toolkit errors."""


# --- link-format wire errors -------------------------------------------------

class LinkFormatError(MemrouteError):
    """A TimeMap body could not be parsed."""


class MalformedLink(LinkFormatError):
    """A link segment violates the link-format grammar."""


class MissingOriginal(LinkFormatError):
    """No link with rel="original" was present."""


class BadDatetime(LinkFormatError):
    """A memento link has a missing or unparseable datetime parameter."""


class MixedOriginals(MemrouteError):
    """TimeMaps being merged disagree on their normalized original URI."""


# --- URI / hostname errors ---------------------------------------------------

class NoHost(MemrouteError):
    """The URI has no usable hostname component."""


class NoTld(MemrouteError):
    """The hostname has no extractable top-level domain."""


# --- sampling errors ---------------------------------------------------------

class EmptyUniverse(MemrouteError):
    """No usable hosts remain after hostification and dedup."""


class UnknownTld(MemrouteError):
    """A requested TLD does not occur in the universe (strict mode only)."""


class MalformedRow(MemrouteError):
    """An input row could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None, path: str | None = None):
        self.line_no = line_no
        self.path = path
        where = ""
        if path is not None:
            where += f" in {path}"
        if line_no is not None:
            where += f" at line {line_no}"
        super().__init__(message + where)


class NoExtractableRequests(MemrouteError):
    """No memento or TimeMap requests were found in the access log."""


# --- profiling errors --------------------------------------------------------

class SampleMismatch(MemrouteError):
    """A lookup result refers to a URI that is not in the sample."""


class MissingLanguageLabels(MemrouteError):
    """The sample lacks the language labels this computation needs."""


class NoData(MemrouteError):
    """No lookup results exist for the requested archive."""


class SampleTooSmall(MemrouteError):
    """The sample has fewer entries than the requested fold count."""


# --- routing / aggregation errors --------------------------------------------

class PolicyError(MemrouteError):
    """A routing policy is inconsistent with the configured archives."""


class AllArchivesFailed(MemrouteError):
    """Every archive errored or timed out; the full TimeMap is unavailable."""


class ConfigError(MemrouteError):
    """The configuration file is invalid or references missing paths."""
