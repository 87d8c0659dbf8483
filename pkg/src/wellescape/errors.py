"""Exception hierarchy shared across the package."""


class WellEscapeError(Exception):
    """Base class for all package-specific errors."""


class DomainError(WellEscapeError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class DegenerateFlowError(WellEscapeError):
    """The slow flow has no angular structure (F = 0)."""


class NoResonanceError(WellEscapeError):
    """No critical point of the slow flow was found in the energy range."""


class NoCurveError(WellEscapeError):
    """A requested level curve has no points in the sampled range."""


class NoConnectionError(WellEscapeError):
    """No saddle connection exists in the searched forcing range."""


class GeometryError(WellEscapeError):
    """A sampled boundary polygon is geometrically invalid."""


class InconsistentCenterError(WellEscapeError):
    """The slow-flow center maps to an escaping trajectory; the bisection
    premise of the threshold calibration does not hold."""


class UnsupportedPlaneError(WellEscapeError, TypeError):
    """The operation is undefined for this grid plane."""
