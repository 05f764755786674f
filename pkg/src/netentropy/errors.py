"""Exception types raised across the package."""

from __future__ import annotations


class NetEntropyError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(NetEntropyError, ValueError):
    """Input data violates a documented invariant."""


class ResourceLimitError(NetEntropyError):
    """A configured size or iteration cap was exceeded."""


# probdist
class NonUnitMass(ValidationError):
    pass


class NegativeProbability(ValidationError):
    pass


class ZeroProbability(ValidationError):
    pass


class UnknownSymbol(ValidationError):
    pass


class DuplicateOutcome(ValidationError):
    pass


class UnknownVariable(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class GroundSetTooLarge(ResourceLimitError):
    pass


# partitions
class SupportTooLarge(ResourceLimitError):
    pass


class SupportTooSmall(ValidationError):
    pass


class InconsistentOracle(NetEntropyError):
    """Oracle answers cannot come from partition variables of any distribution."""


class NonDistribution(InconsistentOracle):
    pass


class NonFactorizableCoordinates(InconsistentOracle):
    pass


class PropertyViolation(NetEntropyError, AssertionError):
    """A structural property that is a theorem failed; this is a bug, not bad data."""


# polycone
class DimensionMismatch(ValidationError):
    pass


class NumIterationsExceeded(ResourceLimitError):
    pass


# netmodel
class CyclicGraph(ValidationError):
    pass


class NonPositiveCapacity(ValidationError):
    pass


class SourceDemandOverlap(ValidationError):
    pass


class DanglingReference(ValidationError):
    pass


class InvalidEntropyTable(ValidationError):
    pass


class MissingTableEntry(ValidationError):
    pass


class AlphabetMismatch(ValidationError):
    pass


# auxgen
class DependentBasisVectors(ValidationError):
    pass


class SpanDeficient(ValidationError):
    pass


class SearchSpaceTooLarge(ResourceLimitError):
    pass
