"""Exception types raised across the library."""


class FractalStiffError(Exception):
    """Base class for all library errors."""


class SingularMatrix(FractalStiffError):
    """A matrix that must be inverted has a vanishing pivot."""


class EigenFailure(FractalStiffError):
    """The symmetric eigen-solver did not converge."""


class FixedPointFailure(FractalStiffError):
    """An iterative fixed-point solve hit its iteration cap."""


class SingularJacobian(FractalStiffError):
    """The Newton Jacobian could not be factorized."""


class GeometryError(FractalStiffError, ValueError):
    """A structural model has invalid geometry."""


class ArgumentError(FractalStiffError, ValueError):
    """An argument lies outside the domain of an operation."""
