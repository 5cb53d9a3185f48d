"""Exception hierarchy shared by all holonomy modules."""


class HolonomyError(Exception):
    """Base class for every error raised by the library."""


class GeometryError(HolonomyError):
    """Raised when geometric preconditions (cover membership, partitions) fail."""


class NumericalError(HolonomyError):
    """Raised when a numerical procedure cannot reach its tolerance."""


class EmptyOverlapSamples(GeometryError):
    pass


class NonUnitTransition(GeometryError):
    pass


class PointOutsideChart(GeometryError):
    pass


class PointOutsideOverlap(GeometryError):
    pass


class NoCoveringChart(GeometryError):
    def __init__(self, where, message=None):
        self.where = where
        super().__init__(message or f"no chart covers the sample at {where!r}")


class ResolutionTooCoarse(GeometryError):
    pass


class InvalidRelabel(GeometryError):
    pass


class InvalidPartition(GeometryError):
    pass


class InvalidMove(GeometryError):
    pass


class EndpointMismatch(GeometryError):
    pass


class ArcOutsideOverlap(GeometryError):
    pass


class GeneralPositionFailure(GeometryError):
    pass


class CutGeometryInvalid(GeometryError):
    pass


class SeamMismatch(GeometryError):
    pass


class BadParameter(GeometryError):
    pass


class StepTooLarge(GeometryError):
    pass


class QuadratureNotConverged(NumericalError):
    pass
