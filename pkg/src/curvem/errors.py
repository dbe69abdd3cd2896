"""Exception hierarchy shared by all curvem modules."""


class CurvemError(Exception):
    """Base class for every error raised by curvem."""


class DomainError(CurvemError, ValueError):
    """A curve parameter outside its admissible range."""


class GeometryError(CurvemError):
    """Degenerate or inconsistent geometry (zero-length chords, singular systems)."""


class MeshError(CurvemError):
    """Inconsistent mesh topology or boundary tagging."""


class MeshQualityError(GeometryError):
    """An element violates the shape assumptions the method relies on."""


class UnsupportedConfiguration(CurvemError):
    """A valid but unsupported combination of element features."""


class DataError(CurvemError):
    """Problem data that cannot be evaluated where it is needed."""


class ConfigError(CurvemError):
    """Invalid run configuration."""


class FactorizationError(CurvemError):
    """The reduced system is not symmetric positive definite."""

    def __init__(self, message, pivot_index=None, pivot_value=None):
        super().__init__(message)
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
