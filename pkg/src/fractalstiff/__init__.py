"""Exact stiffness matrices of self-similar structures.

Submodules:

- ``matrixcore``: small dense kernel (solves, rank, eigenvalues, condensation)
- ``beamlab``: self-similar derivation of the Euler-Bernoulli beam
- ``framelab``: triangular frame from classical beams, axial/bending split
- ``gasket``: Sierpinski gasket with drilling DOFs, fixed-point modes
- ``assembler``: structures tiled from gasket triangles
"""

from .errors import (
    ArgumentError,
    EigenFailure,
    FixedPointFailure,
    FractalStiffError,
    GeometryError,
    SingularJacobian,
    SingularMatrix,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "EigenFailure",
    "FixedPointFailure",
    "FractalStiffError",
    "GeometryError",
    "SingularJacobian",
    "SingularMatrix",
]
