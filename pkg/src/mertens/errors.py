"""Exception hierarchy shared across the package."""


class MertensError(Exception):
    """Base class for all package errors."""


class ResourceLimitError(MertensError):
    """A requested computation exceeds the configured memory or size budget."""


class ValidityBoundError(MertensError):
    """Inputs fall outside the range where an algorithm is known correct."""


class ContractViolationError(MertensError):
    """An operation was invoked out of order or with inconsistent state."""


class CeilingExceededError(ResourceLimitError):
    """The naive O(n) verification path was asked to exceed its ceiling."""


class TableParseError(MertensError):
    """A zero-table stream failed to parse.

    Carries the 1-based line number when available.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PrecisionError(MertensError):
    """Decimal masters carry too few digits for the requested rebase offset."""


class EnvelopeExceededError(MertensError):
    """An evaluation point lies outside the float-accuracy envelope; rebase closer."""


class InvalidQueryError(MertensError):
    """A crossing-probability query violates the formula's regime."""


class NotFoundError(MertensError):
    """A search completed without a qualifying result."""
