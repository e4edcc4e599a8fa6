"""Exception hierarchy shared across the package.

Every error raised on a documented contract path derives from FinragError so
the CLI and HTTP layers can map failures to exit codes / status codes
uniformly.
"""

from __future__ import annotations


class FinragError(Exception):
    """Base class for all package errors."""


class InputError(FinragError):
    """A caller violated an operation's precondition."""


class ConfigurationError(FinragError):
    """Inconsistent configuration, e.g. embedder dimension mismatch."""


class CorpusFormatError(InputError):
    """A corpus line could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class UnknownKindError(CorpusFormatError):
    """A record declared a document kind outside the known enum."""

    def __init__(self, kind: str, line_no: int | None = None):
        super().__init__(f"unknown document kind {kind!r}", line_no)
        self.kind = kind


class CoverageError(InputError):
    """A price series is missing a month the computation requires."""

    def __init__(self, company_id: str, month: str):
        super().__init__(f"no price for company {company_id!r} in month {month}")
        self.company_id = company_id
        self.month = month


class TemplateBindingError(InputError):
    """A template placeholder had no binding; names the placeholder."""

    def __init__(self, placeholder: str):
        super().__init__(f"missing binding for placeholder {placeholder!r}")
        self.placeholder = placeholder


class TransportError(FinragError):
    """A remote backend could not be reached; retriable."""


class FixtureError(FinragError):
    """A scripted/replay backend had no entry for an input digest."""

    def __init__(self, digest: str):
        super().__init__(f"no fixture recorded for input digest {digest}")
        self.digest = digest


class ExtractionParseError(FinragError):
    """Extractor backend output could not be parsed; preserves the raw text."""

    def __init__(self, message: str, raw_output: str):
        super().__init__(message)
        self.raw_output = raw_output


class JudgeFormatError(FinragError):
    """Judge backend output carried no recognizable verdict."""

    def __init__(self, raw_output: str):
        super().__init__(f"unparseable judge verdict: {raw_output!r}")
        self.raw_output = raw_output


class EmptyIndexError(FinragError):
    """Retrieval was attempted against an index with no records."""


class NotFoundError(FinragError):
    """A referenced entity (session, template, scenario) does not exist."""
