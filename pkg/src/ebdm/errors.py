"""Semantic exception hierarchy shared across the package.

The CLI maps these onto process exit codes (validation 2, data 3,
numerical 4); library callers can catch ``EbdmError`` for everything.
"""


class EbdmError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EbdmError, ValueError):
    """An input violates a documented precondition or invariant."""


class DataError(EbdmError):
    """An input file is missing, malformed, or has too few usable rows."""


class NumericalError(EbdmError):
    """A numerical procedure failed to produce a usable result."""


class DegenerateFallbackWarning(RuntimeWarning):
    """A posterior-mean computation underflowed and fell back to the
    nearest component/atom. The returned value is a best effort."""
