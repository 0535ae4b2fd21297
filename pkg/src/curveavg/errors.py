"""Exception hierarchy.

Every error raised on purpose by this package derives from CurveAvgError, so
callers (and the CLI) can distinguish "the configuration or request is bad"
from genuine bugs.
"""


class CurveAvgError(Exception):
    """Base class for all errors raised by curveavg."""


class DomainError(CurveAvgError):
    """An argument lies outside its documented range."""


class ApertureError(CurveAvgError):
    """A frequency (or cone parameter) lies outside the cone neighborhood."""


class ConvergenceError(CurveAvgError):
    """A Newton iteration failed to converge; usually the aperture is too wide."""


class QuadratureError(CurveAvgError):
    """Adaptive quadrature could not meet its accuracy target."""


class GridError(CurveAvgError):
    """A frequency-support requirement is not representable on the grid."""


class GeometryError(CurveAvgError):
    """A spatial region (ball, window) does not fit the periodic box."""


class ResolutionError(CurveAvgError):
    """A finite-difference step underflowed the representable scale."""


class ConfigError(CurveAvgError):
    """Invalid run configuration; carries the full list of violations."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
