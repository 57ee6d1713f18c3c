"""Self-similar derivation of the Euler-Bernoulli beam stiffness.

A beam with two end nodes (transverse displacement and rotation each) is
parametrized by symmetry and statics down to two constants ``a`` and ``c``.
Gluing two copies end to end and condensing the shared node gives the
stiffness of the doubled beam; requiring the non-dimensional ratio
``gamma = c / (a L^2)`` to survive the doubling fixes ``gamma = 1/3`` and the
stiffness scaling ratio ``1/8``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, FixedPointFailure
from .matrixcore import static_condense


@dataclass(frozen=True)
class BeamParams:
    a: float  # translational coefficient, force/length
    c: float  # rotational coefficient, force*length
    L: float

    def __post_init__(self):
        if not (self.a > 0 and self.c > 0 and self.L > 0):
            raise ArgumentError(f"beam parameters must be positive, got {self}")

    @property
    def gamma(self) -> float:
        return self.c / (self.a * self.L**2)


@dataclass(frozen=True)
class BeamReport:
    """Result of the beam self-similarity solve."""

    L: float
    gamma: float
    c_over_a: float
    scaling: float
    iterations: int
    residual: float


def static_matrix(L: float) -> np.ndarray:
    """Rows: transverse force balance and moment balance about node 1."""
    return np.array([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, L, 1.0]])


def parametrized_beam_stiffness(p: BeamParams) -> np.ndarray:
    a, c, L = p.a, p.c, p.L
    h = a * L / 2
    t = a * L**2 / 2 - c
    return np.array(
        [
            [a, h, -a, h],
            [h, c, -h, t],
            [-a, -h, a, -h],
            [h, t, -h, c],
        ]
    )


def double_beam_assembly(p: BeamParams) -> np.ndarray:
    """6x6 stiffness of two beams joined end to end.

    DOF order: left end (1, 2), right end (3, 4), shared middle node (5, 6).
    """
    k = parametrized_beam_stiffness(p)
    big = np.zeros((6, 6))
    for idx in ([0, 1, 4, 5], [4, 5, 2, 3]):
        big[np.ix_(idx, idx)] += k
    return big


def condense_double_beam(p: BeamParams) -> np.ndarray:
    """Stiffness of the beam of length ``2L`` obtained by condensing the middle node."""
    if abs(4 * p.c - p.a * p.L**2) <= 1e-12 * p.a * p.L**2:
        warnings.warn(
            "c = a L^2 / 4: the condensed double beam has zero stiffness",
            RuntimeWarning,
            stacklevel=2,
        )
    return static_condense(double_beam_assembly(p), keep=range(4)).stiffness


def condensed_gamma(gamma: float, L: float = 1.0) -> float:
    """Non-dimensional ratio of the doubled beam, computed through condensation."""
    k_hat = condense_double_beam(BeamParams(1.0, gamma * L**2, L))
    return k_hat[1, 1] / (k_hat[0, 0] * (2 * L) ** 2)


def solve_beam_self_similarity(
    L: float, gamma0: float = 1.0, tol: float = 1e-14, max_iter: int = 50
) -> BeamReport:
    """Solve ``gamma_hat(gamma) = gamma`` by scalar Newton iteration.

    The derivative is a central difference; the map is affine in ``gamma``
    so it is exact up to roundoff.
    """
    if not L > 0:
        raise ArgumentError("L must be positive")
    g = gamma0
    h = 1e-6
    for it in range(1, max_iter + 1):
        r = condensed_gamma(g) - g
        if abs(r) <= tol:
            break
        dr = (condensed_gamma(g + h) - condensed_gamma(g - h)) / (2 * h) - 1.0
        if dr == 0.0:
            raise FixedPointFailure("zero derivative in beam fixed-point solve")
        g -= r / dr
    else:
        raise FixedPointFailure(f"no convergence after {max_iter} iterations (gamma={g})")
    k_hat = condense_double_beam(BeamParams(1.0, g * L**2, L))
    return BeamReport(
        L=L,
        gamma=g,
        c_over_a=g * L**2,
        scaling=float(k_hat[0, 0]),
        iterations=it,
        residual=abs(condensed_gamma(g) - g),
    )


def self_similar_beam_stiffness(a: float, L: float) -> np.ndarray:
    """Beam stiffness at the self-similar fixed point ``c = a L^2 / 3``."""
    return parametrized_beam_stiffness(BeamParams(a, a * L**2 / 3, L))


def euler_bernoulli_stiffness(EI: float, L: float) -> np.ndarray:
    """Textbook 4x4 Euler-Bernoulli stiffness (transverse displacement, rotation per node)."""
    return EI * np.array(
        [
            [12 / L**3, 6 / L**2, -12 / L**3, 6 / L**2],
            [6 / L**2, 4 / L, -6 / L**2, 2 / L],
            [-12 / L**3, -6 / L**2, 12 / L**3, -6 / L**2],
            [6 / L**2, 2 / L, -6 / L**2, 4 / L],
        ]
    )


def recovered_classical_stiffness(EI: float, L: float) -> np.ndarray:
    """Fixed-point beam matrix with the leading coefficient set to ``12 EI / L^3``.

    This is the choice of ``a`` that reproduces the Euler-Bernoulli matrix.
    """
    return self_similar_beam_stiffness(12.0 * EI / L**3, L)
