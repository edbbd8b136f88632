"""Exception hierarchy. Public functions raise these, never bare ValueError."""


class SteinDmcError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SteinDmcError, ValueError):
    """Malformed input: shapes, simplex constraints, parameter domains."""


class AbsoluteContinuityViolation(ValidationError):
    """``p`` puts mass where ``q`` has none, so D(p||q) is infinite."""


class SupportAssumptionViolation(ValidationError):
    """Q_UV is not strictly positive (standing assumption of the problem)."""


class DegenerateChannel(ValidationError):
    """A channel output is unreachable from every input."""


class NotFullyConnected(ValidationError):
    """Operation needs a channel with strictly positive transitions."""


class InfeasibleTargets(ValidationError):
    """Marginal targets are inconsistent with the reference joint pmf."""


class RegimeMismatch(ValidationError):
    """Scheme operation is not defined for the instance's regime."""


class ScheduleViolation(ValidationError):
    """A k(n) or C_n schedule fails the sublinear-growth sanity checks."""


class InsufficientData(ValidationError):
    """Too few usable evaluation points for an exponent fit."""


class ResourceLimit(SteinDmcError):
    """Exact enumeration would exceed the configured type-count cap."""

    def __init__(self, message: str, *, count: int | None = None, cap: int | None = None,
                 n: int | None = None):
        super().__init__(message)
        self.count = count
        self.cap = cap
        self.n = n


class NonConvergence(SteinDmcError):
    """An iterative solver exhausted its iteration budget."""
