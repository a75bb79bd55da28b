"""Exception hierarchy.

Errors split into two families so front ends can map them to exit codes:
`ValidationError` for inputs or scenarios that are rejected, and
`NumericalError` for failures of an otherwise valid computation.
"""


class CausalOrderError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CausalOrderError):
    """An input, configuration or scenario failed validation."""


class NumericalError(CausalOrderError):
    """A numerical procedure failed on valid input."""


class ConfigurationError(ValidationError):
    """Mismatched dimensions, unknown names, malformed parameters."""


class ScenarioInvalidError(ValidationError):
    """Wrong number of worldline crossings or similar structural defect."""


class DegenerateOrderError(ValidationError):
    """The proper-time difference between the events is below resolution."""


class OrientationError(ValidationError):
    """A system worldline is not future pointing at its crossing."""


class TimelikeViolationError(ValidationError):
    """A curve segment is spacelike or null where a timelike one is required."""

    def __init__(self, message, lam=None):
        super().__init__(message)
        self.lam = lam


class NotApplicableError(ValidationError):
    """An operation's precondition on the scenario does not hold."""


class ProtocolError(ValidationError):
    """The operational encoding protocol cannot be applied to this state."""


class InvalidStateError(ValidationError):
    """A quantum state or Bloch vector violates its invariants."""


class PostSelectionError(NumericalError):
    """A post-selection outcome has zero probability."""


class ConstructionError(NumericalError):
    """A diffeomorphism could not be built with certified invertibility."""


class DegeneracyError(NumericalError):
    """Singular metric, zero vector or null vector where none is allowed."""


class ConvergenceError(NumericalError):
    """An iterative solver or adaptive quadrature did not converge."""
