class GencalError(Exception):
    """Base class for library errors."""


class DimensionMismatch(GencalError, ValueError):
    pass


class DegreeError(GencalError, ValueError):
    """A form had components in a degree the operation does not accept."""


class ParityMismatch(GencalError, ValueError):
    pass


class NotPositiveDefinite(GencalError, ValueError):
    pass


class NotSkew(GencalError, ValueError):
    pass


class NotPure(GencalError, ValueError):
    pass


class DegenerateSubspace(GencalError, ValueError):
    pass


class NotInPin(GencalError, ValueError):
    pass


class ConvergenceError(GencalError, RuntimeError):
    pass


class PreconditionError(GencalError, ValueError):
    """Inputs violate a stated precondition, so the check is refused."""
