"""Exception hierarchy.

Every error raised for bad user input derives from :class:`FapError`, which is
itself a :class:`ValueError`, so callers that only care about "bad input" can
catch ``ValueError``.
"""


class FapError(ValueError):
    """Base class for all parameter and domain errors raised by fapchan."""


class ParameterError(FapError):
    """A model parameter is outside its admissible range (e.g. lambda <= 0)."""


class DimensionError(FapError):
    """Array shapes disagree with the declared dimension."""


class DomainError(FapError):
    """A function argument lies outside the function's domain."""


class StabilityError(FapError):
    """Two VDFAP laws cannot be convolved within the family (drift mismatch)."""


class NormalizationError(FapError):
    """A density grid carries the wrong normalization for the requested operation."""
