"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class QdsError(Exception):
    """Base class for every error raised by the package."""


class TruncationError(QdsError, ArithmeticError):
    """A requested coefficient lies outside the known window."""


class EmptyWindow(QdsError, ValueError):
    """An operation produced a series with no exactly known coefficient."""


class NonGenericParameter(QdsError, ArithmeticError):
    """A denominator such as 1 - q^(lambda*m) came within epsilon of zero."""


class DegreeMismatch(QdsError, ValueError):
    """An operation needs integer-graded symbols but got a complex base degree."""


class ShapeError(QdsError, ValueError):
    """Input does not have the required matrix or symbol shape."""


class ConsistencyError(QdsError, ArithmeticError):
    """A quantity proven to vanish came out larger than its tolerance."""


class CutoffExceeded(QdsError, ValueError):
    """A diagonal beyond the configured cutoff was requested."""


class ZeroLambda(QdsError, ValueError):
    """The projection onto constant-pattern diagonals needs lambda != 0."""


class ConfigError(QdsError, ValueError):
    """Configuration or input file could not be parsed or validated."""
