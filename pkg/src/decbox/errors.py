"""Exception hierarchy shared by every module of the package."""


class DecError(Exception):
    """Base class for all errors raised by decbox."""


class MeshError(DecError, ValueError):
    """Invalid mesh input (validation error, CLI exit code 1)."""


class NonManifoldEdge(MeshError):
    pass


class NonManifoldVertex(MeshError):
    pass


class InconsistentOrientation(MeshError):
    pass


class DegenerateTriangle(MeshError):
    pass


class DuplicateTriangle(MeshError):
    pass


class DanglingVertex(MeshError):
    pass


class DegenerateSubdivisionSimplex(MeshError):
    pass


class ParseError(MeshError):
    pass


class PerturbationFailed(MeshError):
    pass


class DimensionMismatch(DecError, ValueError):
    pass


class NoInteriorVertices(DecError):
    pass


class NumericalError(DecError, ArithmeticError):
    """Numerical failure (CLI exit code 2)."""


class MaxIterations(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    pass


class EquivalenceViolation(NumericalError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
