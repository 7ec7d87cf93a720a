"""Exception hierarchy shared by all solitonlab modules."""


class SolitonLabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SolitonLabError):
    """A point lies outside the chart domain (or its finite-difference margin)."""


class DegenerateMetricError(SolitonLabError):
    """The metric is singular or not positive definite at a point."""


class UnsupportedDimensionError(SolitonLabError):
    pass


class DimensionMismatchError(SolitonLabError):
    pass


class ConfigError(SolitonLabError):
    """Invalid configuration. ``line`` is the 1-based config line, if known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ExpressionError(ConfigError):
    """Malformed coefficient expression; ``token`` names the offending token."""

    def __init__(self, message, token=None, position=None, line=None):
        self.token = token
        self.position = position
        if token is not None:
            message = f"{message} (token {token!r} at column {position})"
        super().__init__(message, line=line)


class NotClosedError(SolitonLabError):
    """Refusal: a potential was requested for a field whose flat form is not closed."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class FlowExitError(SolitonLabError):
    """An integration left the domain; carries the partial result."""

    def __init__(self, message, exit_time, point):
        self.exit_time = exit_time
        self.point = point
        super().__init__(message)


class StiffnessError(SolitonLabError):
    """Step size underflow in the adaptive integrator."""

    def __init__(self, message, t, state):
        self.t = t
        self.state = state
        super().__init__(message)


class ImmersionError(SolitonLabError):
    """The patch Jacobian is rank deficient."""


class InsufficientDataError(SolitonLabError):
    pass


class DegenerateInputError(SolitonLabError):
    pass


class CertificationError(SolitonLabError):
    """A certification run could not be completed (e.g. too many dropped samples)."""


class RefusalError(SolitonLabError):
    """The inputs violate the precondition of the requested procedure."""
