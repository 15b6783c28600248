"""Domain errors."""

from __future__ import annotations


class CircleMapError(Exception):
    """Base library error."""


class ValidationError(CircleMapError):
    """Validation error for user-visible failures."""


class BranchScriptExhaustedError(CircleMapError):
    """A scripted branch or tie-break list ran out of choices."""


class IndeterminateOutcomeError(CircleMapError):
    """The outcome depends entirely on tie resolution."""


class SolverError(CircleMapError):
    """Numerical solver found no admissible stationary point."""
