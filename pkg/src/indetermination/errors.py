"""Semantic exceptions and warnings shared across the package."""

from __future__ import annotations


class IndeterminationError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDistribution(IndeterminationError, ValueError):
    """A probability vector or matrix violates its invariants."""


class ConditionHViolation(IndeterminationError):
    """The margins cannot support a nonnegative indetermination coupling.

    Feasibility requires ``p * min(mu) + q * min(nu) >= 1``.
    """


class DegenerateInput(IndeterminationError):
    """Input is structurally valid but degenerate for the requested operation."""


class OutOfSupport(IndeterminationError, ValueError):
    """A point lies outside the support rectangle of a continuous coupling."""


class SizeExceeded(IndeterminationError):
    """An exhaustive computation was requested beyond its size cap."""


class ToleranceBreach(IndeterminationError):
    """An internally computed quantity failed its own consistency check.

    This indicates a bug, not bad input.
    """


class EmptyClassWarning(UserWarning):
    """A task partition contains a worker with no assigned tasks."""
