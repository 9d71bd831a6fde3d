"""Exception hierarchy shared across the package."""


class CircleFlowError(Exception):
    """Base class for all package errors."""


class MeshError(CircleFlowError):
    """Invalid triangulated-surface input."""


class NonManifold(MeshError):
    """An edge or vertex violates the manifold-with-boundary condition."""


class InconsistentOrientation(MeshError):
    """Two triangles traverse a shared edge in the same direction."""


class Disconnected(MeshError):
    """The 1-skeleton is not connected."""


class EmptySubset(CircleFlowError):
    """Subset analysis requires a non-empty vertex set."""


class NonPositiveRadius(CircleFlowError):
    """Radii must be strictly positive and finite."""


class NumericalDegeneracy(CircleFlowError):
    """A cosine left [-1, 1] by more than the roundoff window."""


class C1Violation(CircleFlowError):
    """Some triangle has a negative xi value, so edge lengths may fail
    the triangle inequality."""

    def __init__(self, triangles, message=None):
        self.triangles = list(triangles)
        super().__init__(message or f"condition (C1) fails on triangles {self.triangles}")


class DomainViolation(CircleFlowError):
    """A coordinate vector lies outside the admissible domain
    (e.g. non-negative u in hyperbolic geometry)."""


class EnumerationTooLarge(CircleFlowError):
    """Exhaustive subset enumeration requested beyond the cutoff."""


class SingularHessian(CircleFlowError):
    """The Newton linear system was singular where it must not be."""


class NotDiskType(CircleFlowError):
    """Layout requires a disk-type surface (chi = 1, one boundary curve)."""


class NonflatInterior(CircleFlowError):
    """Layout requires vanishing curvature at interior vertices."""


class InsufficientHistory(CircleFlowError):
    """Rate fitting needs a converged run with enough residual samples."""


class ParseError(CircleFlowError):
    """Malformed instance or solution text."""

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ValidationError(CircleFlowError):
    """Structurally well-formed input violating a named constraint."""

    def __init__(self, constraint, message):
        self.constraint = constraint
        super().__init__(f"{constraint}: {message}")
