"""Multi-scaled stiffness of the Sierpinski gasket with drilling DOFs.

A 9x9 gasket stiffness admissible under the triangle's symmetries and under
equilibrium depends on five coefficients ``a1, a2, a3, a4, b1``.  Three
half-size copies are assembled into a gasket of twice the side, the mid-side
nodes are condensed out, and the non-dimensional entries of the result are
compared with those of the original.  Each fixed point of that map is one
stiffness mechanism (axial or bending) with its own scaling ratio.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .errors import ArgumentError, FixedPointFailure, SingularJacobian, SingularMatrix
from .framelab import (
    DRILLING_VECTORS,
    HOMOGENEOUS_EXTENSION,
    BlockPair,
    tile_blocks,
)
from .matrixcore import min_sym_eigenvalue, numerical_rank, static_condense

SQRT3 = math.sqrt(3.0)

# rotation angles (degrees) taking each corner's local frame into the global one
CORNER_ANGLES = (270.0, 150.0, 30.0)

# node numbering of the doubled gasket: corners I, J, K then mid-sides I', J', K'
# (I' on IK, J' on IJ, K' on JK); sub-gaskets listed top, lower-left, lower-right
SUBGASKETS = ((0, 4, 3), (4, 1, 5), (3, 5, 2))


@dataclass(frozen=True)
class StiffnessParams:
    a1: float
    a2: float
    a3: float
    a4: float
    b1: float
    d: float = 1.0

    def __post_init__(self):
        if self.a1 == 0:
            raise ArgumentError("a1 must be non-zero")
        if not self.d > 0:
            raise ArgumentError("d must be positive")


@dataclass(frozen=True)
class NondimBlocks:
    """Free non-dimensional entries; ``alpha1 = 1`` is implied."""

    alpha2: float
    alpha3: float
    alpha4: float
    beta1: float

    @classmethod
    def from_vector(cls, x) -> "NondimBlocks":
        return cls(*(float(v) for v in x))

    @classmethod
    def from_params(cls, p: StiffnessParams) -> "NondimBlocks":
        return cls(p.a2 / p.a1, p.a3 / (p.a1 * p.d**2), p.a4 / (p.a1 * p.d), p.b1 / p.a1)

    @classmethod
    def from_stiffness(cls, K, d: float) -> "NondimBlocks":
        K = np.asarray(K)
        a1 = K[0, 0]
        return cls(K[1, 1] / a1, K[2, 2] / (a1 * d**2), K[1, 2] / (a1 * d), K[0, 3] / a1)

    def vector(self) -> np.ndarray:
        return np.array([self.alpha2, self.alpha3, self.alpha4, self.beta1])

    def to_params(self, a1: float = 1.0, d: float = 1.0) -> StiffnessParams:
        return StiffnessParams(
            a1, a1 * self.alpha2, a1 * self.alpha3 * d**2, a1 * self.alpha4 * d, a1 * self.beta1, d
        )

    @property
    def betas(self) -> tuple[float, float, float, float, float, float]:
        """``beta1 .. beta6`` with ``beta2 .. beta6`` from non-dimensional equilibrium."""
        a2, a3, a4, b1 = self.alpha2, self.alpha3, self.alpha4, self.beta1
        t = (1.0 - b1) / 3 - a2 / 2
        return (
            b1,
            SQRT3 / 3 * (1.0 - b1),
            SQRT3 / 2 * a4 - t,
            a2 - (1.0 - b1),
            -a4 / 2 + SQRT3 * t,
            -a3 / 2 - t,
        )

    def alpha_matrix(self) -> np.ndarray:
        return np.array(
            [[1.0, 0, 0], [0, self.alpha2, self.alpha4], [0, self.alpha4, self.alpha3]]
        )

    def beta_matrix(self) -> np.ndarray:
        b1, b2, b3, b4, b5, b6 = self.betas
        return np.array([[b1, b2, b3], [-b2, b4, b5], [-b3, b5, b6]])


def gamma_matrix(d: float) -> np.ndarray:
    return np.diag([1.0, 1.0, d])


def equilibrium_completion(a1, a2, a3, a4, b1, d) -> tuple[float, float, float, float, float]:
    """Dimensional ``b2 .. b6`` forced by equilibrium."""
    t = (a1 - b1) / 3 - a2 / 2
    return (
        SQRT3 / 3 * (a1 - b1),
        SQRT3 / 2 * a4 - t * d,
        a2 - (a1 - b1),
        -a4 / 2 + SQRT3 * t * d,
        -a3 / 2 - t * d**2,
    )


def complete_params(p: StiffnessParams) -> BlockPair:
    b2, b3, b4, b5, b6 = equilibrium_completion(p.a1, p.a2, p.a3, p.a4, p.b1, p.d)
    A = np.array([[p.a1, 0, 0], [0, p.a2, p.a4], [0, p.a4, p.a3]], dtype=float)
    B = np.array([[p.b1, b2, b3], [-b2, b4, b5], [-b3, b5, b6]], dtype=float)
    return BlockPair(A, B)


def complete_params_nondim(p: StiffnessParams) -> BlockPair:
    """Same blocks as :func:`complete_params`, via ``a1 * G alpha G`` and ``a1 * G beta G``."""
    x = NondimBlocks.from_params(p)
    g = gamma_matrix(p.d)
    return BlockPair(p.a1 * g @ x.alpha_matrix() @ g, p.a1 * g @ x.beta_matrix() @ g)


def build_gasket_stiffness(p: StiffnessParams) -> np.ndarray:
    """9x9 stiffness in local corner frames (top, lower-left, lower-right)."""
    blocks = complete_params(p)
    return tile_blocks(blocks.A, blocks.B)


def rotation_matrix(phi: float, degrees: bool = False) -> np.ndarray:
    """Planar rotation of components by angle ``phi``; the drilling entry is left alone."""
    if degrees:
        phi = math.radians(phi)
    c, s = math.cos(phi), math.sin(phi)
    # exact values at multiples of 90 degrees keep assembled zeros clean
    c, s = round(c, 15) or 0.0, round(s, 15) or 0.0
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


@functools.lru_cache(maxsize=None)
def _corner_rotation() -> np.ndarray:
    r = block_diag(*(rotation_matrix(a, degrees=True) for a in CORNER_ANGLES))
    r.setflags(write=False)
    return r


def corner_rotation() -> np.ndarray:
    """9x9 ``R`` with ``u_global = R @ u_local`` for an upright gasket."""
    return _corner_rotation().copy()


def to_global(K_local) -> np.ndarray:
    R = _corner_rotation()
    return R @ K_local @ R.T


def to_local(K_global) -> np.ndarray:
    R = _corner_rotation()
    return R.T @ K_global @ R


def _scatter_matrix() -> np.ndarray:
    # maps the 18 global DOFs onto the stacked 27 DOFs of the three copies
    P = np.zeros((27, 18))
    for c, nodes in enumerate(SUBGASKETS):
        for k, n in enumerate(nodes):
            P[9 * c + 3 * k : 9 * c + 3 * k + 3, 3 * n : 3 * n + 3] = np.eye(3)
    return P


_SCATTER = _scatter_matrix()


def assemble_doubled(K_local) -> np.ndarray:
    """18x18 global stiffness of three copies joined at the mid-side nodes.

    DOF blocks in node order I, J, K, I', J', K' (global components).
    """
    kg = to_global(K_local)
    stacked = np.zeros((27, 27))
    for c in range(3):
        stacked[9 * c : 9 * c + 9, 9 * c : 9 * c + 9] = kg
    return _SCATTER.T @ stacked @ _SCATTER


@dataclass(frozen=True)
class GasketCondensation:
    """Condensed doubled gasket.

    ``K_hat`` is in local corner frames of the side-``2d`` gasket.
    ``recovery`` maps global corner DOFs (I, J, K) to global mid-side DOFs
    (I', J', K').
    """

    K_hat: np.ndarray
    recovery: np.ndarray
    full: np.ndarray
    d_hat: float
    deflated: int = 0


def condense_stiffness(K_local, d: float) -> GasketCondensation:
    full = assemble_doubled(K_local)
    res = static_condense(full, keep=range(9))
    return GasketCondensation(to_local(res.stiffness), res.recovery, full, 2 * d, res.deflated)


def assemble_and_condense(p: StiffnessParams) -> GasketCondensation:
    return condense_stiffness(build_gasket_stiffness(p), p.d)


def fixed_point_residual(x: NondimBlocks) -> np.ndarray:
    """Non-dimensional entries after doubling minus those before."""
    k_hat = assemble_and_condense(x.to_params()).K_hat
    return NondimBlocks.from_stiffness(k_hat, 2.0).vector() - x.vector()


def _residual_vec(v: np.ndarray) -> np.ndarray:
    r = fixed_point_residual(NondimBlocks.from_vector(v))
    if not np.all(np.isfinite(r)):
        raise SingularMatrix("non-finite residual")
    return r


class Mode(enum.Enum):
    AXIAL = "axial"
    BENDING = "bending"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class NewtonOptions:
    tol: float = 1e-12
    max_iter: int = 100
    fd_step: float = 1e-7
    fd_floor: float = 1e-9
    max_halvings: int = 20
    divergence_bound: float = 1e6


@dataclass(frozen=True)
class ModeSolution:
    blocks: NondimBlocks
    scaling: float
    mode: Mode
    rank: int
    min_eigenvalue: float
    residual: float
    iterations: int = 0
    physical: bool = True

    def stiffness(self, a1: float = 1.0, d: float = 1.0) -> np.ndarray:
        return build_gasket_stiffness(self.blocks.to_params(a1, d))


def scaling_ratio(x: NondimBlocks) -> float:
    """``a1_hat / a1`` for one doubling of the side."""
    return float(assemble_and_condense(x.to_params()).K_hat[0, 0])


def _null_residual(K: np.ndarray, vectors: np.ndarray) -> float:
    scale = np.abs(K).max()
    return float(np.abs(K @ vectors).max() / scale) if scale > 0 else 0.0


def classify_stiffness(K: np.ndarray, rank_tol: float = 1e-9, null_tol: float = 1e-10) -> Mode:
    rank = numerical_rank(K, rank_tol)
    if rank == 3 and _null_residual(K, DRILLING_VECTORS) <= null_tol:
        return Mode.AXIAL
    if rank == 5 and _null_residual(K, HOMOGENEOUS_EXTENSION[:, None]) <= null_tol:
        return Mode.BENDING
    return Mode.UNCLASSIFIED


def classify_mode(x: NondimBlocks) -> Mode:
    return classify_stiffness(build_gasket_stiffness(x.to_params()))


def is_physical(K: np.ndarray, tol: float = 1e-8) -> bool:
    return min_sym_eigenvalue(K) >= -tol * np.abs(K).max()


def make_solution(x: NondimBlocks, iterations: int = 0) -> ModeSolution:
    K = build_gasket_stiffness(x.to_params())
    residual = float(np.abs(fixed_point_residual(x)).max())
    return ModeSolution(
        blocks=x,
        scaling=scaling_ratio(x),
        mode=classify_stiffness(K),
        rank=numerical_rank(K, 1e-9),
        min_eigenvalue=min_sym_eigenvalue(K),
        residual=residual,
        iterations=iterations,
        physical=is_physical(K),
    )


def _fd_jacobian(fun, x: np.ndarray, r: np.ndarray, opts: NewtonOptions) -> np.ndarray:
    n = x.size
    J = np.empty((r.size, n))
    for j in range(n):
        h = max(opts.fd_step * abs(x[j]), opts.fd_floor)
        xp = x.copy()
        xp[j] += h
        J[:, j] = (fun(xp) - r) / h
    return J


def newton_iterate(fun, x0, opts: NewtonOptions = NewtonOptions()) -> tuple[np.ndarray, int]:
    """Damped Newton on ``fun(x) = 0`` with a forward-difference Jacobian.

    A step is halved until the residual's max-norm drops.  If no halving
    helps, the full step is taken anyway: near the axial fixed point the
    residual carries roundoff noise that a strict descent test would stall on.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = fun(x)
    norm = np.abs(r).max()
    for it in range(opts.max_iter + 1):
        if norm <= opts.tol:
            return x, it
        if it == opts.max_iter:
            break
        J = _fd_jacobian(fun, x, r, opts)
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(dx)) or np.linalg.cond(J) > 1e14:
            raise SingularJacobian(f"ill-conditioned Jacobian at iteration {it}")
        lam = 1.0
        accepted = None
        for _ in range(opts.max_halvings + 1):
            try:
                trial = x + lam * dx
                rt = fun(trial)
                nt = np.abs(rt).max()
                if nt < norm:
                    accepted = (trial, rt, nt)
                    break
            except SingularMatrix:
                pass
            lam /= 2
        if accepted is None:
            trial = x + dx
            rt = fun(trial)
            accepted = (trial, rt, np.abs(rt).max())
        x, r, norm = accepted
        if np.abs(x).max() > opts.divergence_bound:
            raise FixedPointFailure(f"iterates diverged at iteration {it}")
    raise FixedPointFailure(f"no convergence in {opts.max_iter} iterations (residual {norm:.3e})")


def newton_solve(start: NondimBlocks, opts: NewtonOptions = NewtonOptions()) -> ModeSolution:
    x, its = newton_iterate(_residual_vec, start.vector(), opts)
    return make_solution(NondimBlocks.from_vector(x), its)


def constrained_bending_solve(
    start: NondimBlocks, opts: NewtonOptions = NewtonOptions()
) -> ModeSolution:
    """Solve for ``alpha2, alpha3, alpha4`` with ``beta1 = -1/2`` held fixed.

    ``a1 + 2 b1 = 0`` makes the homogeneous extension a zero-energy mode,
    which singles out the bending mechanism.
    """
    if abs(start.beta1 + 0.5) > 1e-12:
        raise ArgumentError("constrained bending solve needs beta1 = -1/2")

    def fun(v):
        return _residual_vec(np.append(v, -0.5))[:3]

    x, its = newton_iterate(fun, start.vector()[:3], opts)
    return make_solution(NondimBlocks.from_vector(np.append(x, -0.5)), its)


@dataclass(frozen=True)
class RestartReport:
    """Distinct fixed points found from random starts, ordered by scaling."""

    solutions: list[ModeSolution]
    seed: int
    n_restarts: int
    n_failed: int
    n_converged: int = 0

    @property
    def physical(self) -> list[ModeSolution]:
        return [s for s in self.solutions if s.physical]


RESTART_BOX = (-2.0, 2.0)
DEDUPE_RADIUS = 1e-6


def random_restart_search(
    seed: int, n_restarts: int, opts: NewtonOptions = NewtonOptions()
) -> RestartReport:
    if n_restarts < 1:
        raise ArgumentError("n_restarts must be at least 1")
    rng = np.random.default_rng(seed)
    starts = rng.uniform(*RESTART_BOX, size=(n_restarts, 4))
    found: list[ModeSolution] = []
    failed = 0
    for s in starts:
        try:
            sol = newton_solve(NondimBlocks.from_vector(s), opts)
        except (FixedPointFailure, SingularJacobian, SingularMatrix):
            failed += 1
            continue
        v = sol.blocks.vector()
        if all(np.abs(v - f.blocks.vector()).max() > DEDUPE_RADIUS for f in found):
            found.append(sol)
    found.sort(key=lambda s: (s.scaling, tuple(s.blocks.vector())))
    return RestartReport(found, seed, n_restarts, failed, n_restarts - failed)


def scaling_law(kappa2: float, rho: float) -> float:
    """Stiffness ratio for a geometric ratio ``rho``, given the ratio ``kappa2`` at ``rho = 2``."""
    if not (kappa2 > 0 and rho > 0):
        raise ArgumentError("kappa2 and rho must be positive")
    return kappa2 ** math.log2(rho)


# canonical starting points for the two mechanisms
AXIAL_START = NondimBlocks(0.34, 0.01, 0.01, 0.51)
BENDING_START = NondimBlocks(1.0, 1.0, 1.0, -0.5)


@functools.lru_cache(maxsize=None)
def axial_mode() -> ModeSolution:
    return newton_solve(AXIAL_START)


@functools.lru_cache(maxsize=None)
def bending_mode() -> ModeSolution:
    return constrained_bending_solve(BENDING_START)


def mode_stiffness(mode: Mode, a1: float, d: float) -> np.ndarray:
    """Local-frame 9x9 stiffness of a pure mechanism with leading coefficient ``a1`` at side ``d``."""
    sol = {Mode.AXIAL: axial_mode, Mode.BENDING: bending_mode}[mode]()
    return sol.stiffness(a1, d)
