"""Exception types shared across the stack."""


class HopError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(HopError, ValueError):
    """An argument violates a documented precondition."""


class SchemaError(HopError, ValueError):
    """A document failed validation.

    ``path`` points at the offending field, e.g. ``keyframes[3].pos[17]``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UnreachableError(HopError):
    """An inverse-kinematics target lies outside the workspace.

    ``excess`` is how far (m) the target sits beyond the closest reachable
    point along the hip-to-target line.
    """

    def __init__(self, message: str, excess: float):
        self.excess = excess
        super().__init__(message)


class OutOfViewError(HopError):
    """A ray falls outside the modelled field of view."""


class NoIntersectionError(HopError):
    """A projected ray does not hit the ground plane."""


class NumericalError(HopError):
    """An iterative routine failed to produce a trustworthy result."""

    def __init__(self, message: str, residual: float = float("nan")):
        self.residual = residual
        super().__init__(message)


class CalibrationError(HopError):
    """Calibration input is degenerate (too few or collinear points)."""


class ConfigError(HopError, ValueError):
    """Runtime configuration is unusable (bad value, unresolvable path)."""


class StaleWriteError(HopError):
    """An optimistic-concurrency write lost the race (timestamp mismatch)."""
