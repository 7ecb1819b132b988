"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
structural failures onto distinct process exit statuses.
"""


class SpectralCutsError(Exception):
    exit_code = 1


class ParseError(SpectralCutsError):
    exit_code = 2


class DimensionMismatch(SpectralCutsError, ValueError):
    exit_code = 2


# geometry

class GeometryError(SpectralCutsError, ValueError):
    exit_code = 2


class PointOnCycle(GeometryError):
    pass


class NotPositive(GeometryError):
    pass


class Overlapping(GeometryError):
    pass


class InteriorsOverlap(GeometryError):
    pass


class AllMarked(GeometryError):
    pass


class NoneMarked(GeometryError):
    pass


# contour / spectrum conflicts (exit 3)

class EigenvalueOnContour(SpectralCutsError):
    exit_code = 3


class SingularResolvent(EigenvalueOnContour):
    pass


class BoundaryEigenvalue(EigenvalueOnContour):
    pass


class LineHitsEigenvalue(EigenvalueOnContour):
    pass


class PoleHit(EigenvalueOnContour):
    pass


class OnEigenvalueLine(EigenvalueOnContour):
    pass


# integrability (exit 4)

class NonIntegrableResolvent(SpectralCutsError):
    exit_code = 4

    def __init__(self, message, point=None, exponent=None):
        super().__init__(message)
        self.point = point
        self.exponent = exponent


class QuadratureDiverged(NonIntegrableResolvent):
    pass


class EvaluationFailure(SpectralCutsError):
    exit_code = 4

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


# covers (exit 5)

class CoverInvalid(SpectralCutsError):
    exit_code = 5


class CoverTooTight(CoverInvalid):
    pass


class GridUnavailable(CoverInvalid):
    pass


# section-5 machinery (exit 6)

class NotAppropriateCurve(SpectralCutsError):
    exit_code = 6


class InsufficientCandidates(NotAppropriateCurve):
    pass


class SingularM(SpectralCutsError):
    exit_code = 6


# algebra of cuts and calculus

class ProductNotZero(SpectralCutsError):
    exit_code = 3


class EmptyIntersection(SpectralCutsError):
    exit_code = 3


class SpectrumMissesIntersection(SpectralCutsError):
    exit_code = 3


class CellProductNotCommuting(SpectralCutsError):
    exit_code = 3


class ZeroWitness(SpectralCutsError):
    exit_code = 4


class DomainTooSmall(SpectralCutsError, ValueError):
    exit_code = 2


class DomainViolation(SpectralCutsError, ValueError):
    exit_code = 2
