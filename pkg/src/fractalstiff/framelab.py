"""Equilateral triangular frame built from classical beam elements.

Three identical beams form a triangle of side ``d``.  Nodes are ordered
top, lower-left, lower-right.  Each node carries a local frame: axis 1 along
the median pointing away from the centroid, axis 2 at +90 degrees from it,
and the counter-clockwise drilling rotation.  In these frames the 9x9
stiffness tiles into two distinct 3x3 blocks ``A`` and ``B``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .errors import ArgumentError
from .matrixcore import numerical_rank

SQRT3 = np.sqrt(3.0)

# homogeneous extension and pure drilling patterns in local node frames
HOMOGENEOUS_EXTENSION = np.array([1.0, 0, 0, 1, 0, 0, 1, 0, 0])
DRILLING_VECTORS = np.eye(9)[:, [2, 5, 8]]


@dataclass(frozen=True)
class FrameSpec:
    E: float
    A_s: float
    I: float
    d: float

    def __post_init__(self):
        if not (self.E > 0 and self.d > 0):
            raise ArgumentError("E and d must be positive")
        if self.A_s < 0 or self.I < 0:
            raise ArgumentError("A_s and I must be non-negative")


@dataclass(frozen=True)
class BlockPair:
    """Diagonal block ``A`` and off-diagonal block ``B`` of a triangle stiffness."""

    A: np.ndarray
    B: np.ndarray

    def tile(self) -> np.ndarray:
        return tile_blocks(self.A, self.B)


def tile_blocks(A, B) -> np.ndarray:
    """Cyclic 9x9 layout: ``A`` on the diagonal, ``B`` above, ``B^T`` below (wrapping)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    K = np.empty((9, 9))
    layout = ((A, B, B.T), (B.T, A, B), (B, B.T, A))
    for i, row in enumerate(layout):
        for j, blk in enumerate(row):
            K[3 * i : 3 * i + 3, 3 * j : 3 * j + 3] = blk
    return K


def split_blocks(K) -> BlockPair:
    K = np.asarray(K, dtype=float)
    return BlockPair(K[0:3, 0:3].copy(), K[0:3, 3:6].copy())


def upright_vertices(d: float) -> np.ndarray:
    """Vertex coordinates (top, lower-left, lower-right) of an upright triangle with base centred at the origin."""
    return np.array([[0.0, SQRT3 * d / 2], [-d / 2, 0.0], [d / 2, 0.0]])


def node_frames(vertices) -> np.ndarray:
    """9x9 block-diagonal map from local node components to global components.

    ``u_global = Q @ u_local``.  Vertices must be listed counter-clockwise.
    """
    v = np.asarray(vertices, dtype=float)
    centroid = v.mean(axis=0)
    blocks = []
    for p in v:
        e1 = (p - centroid) / np.linalg.norm(p - centroid)
        e2 = np.array([-e1[1], e1[0]])
        q = np.eye(3)
        q[:2, 0] = e1
        q[:2, 1] = e2
        blocks.append(q)
    return block_diag(*blocks)


def static_matrix(d: float) -> np.ndarray:
    """3x9 equilibrium matrix: force balance in x, y and moments about the top vertex."""
    h = SQRT3 / 2
    return np.array(
        [
            [0, -1, 0, -h, 0.5, 0, h, 0.5, 0],
            [1, 0, 0, -0.5, -h, 0, -0.5, h, 0],
            [0, 0, 1, -d / 2, h * d, 1, d / 2, h * d, 1],
        ]
    )


def check_equilibrium(K, d: float) -> float:
    """``max|S K| / max|K|``; zero for a perfectly equilibrated stiffness."""
    K = np.asarray(K, dtype=float)
    kmax = np.abs(K).max()
    if kmax == 0.0:
        return 0.0
    return float(np.abs(static_matrix(d) @ K).max() / kmax)


def beam_element_stiffness(E: float, A_s: float, I: float, L: float) -> dict[str, np.ndarray]:
    """Axial and bending 6x6 stiffness of a plane beam in its own axes.

    DOF order per node: axial displacement, transverse displacement, rotation.
    """
    ea = E * A_s / L
    ei = E * I
    axial = np.zeros((6, 6))
    axial[np.ix_([0, 3], [0, 3])] = ea * np.array([[1, -1], [-1, 1]])
    kb = ei * np.array(
        [
            [12 / L**3, 6 / L**2, -12 / L**3, 6 / L**2],
            [6 / L**2, 4 / L, -6 / L**2, 2 / L],
            [-12 / L**3, -6 / L**2, 12 / L**3, -6 / L**2],
            [6 / L**2, 2 / L, -6 / L**2, 4 / L],
        ]
    )
    bend = np.zeros((6, 6))
    bend[np.ix_([1, 2, 4, 5], [1, 2, 4, 5])] = kb
    return {"axial": axial, "bend": bend}


def _beam_to_global(k_local: np.ndarray, p0, p1) -> np.ndarray:
    dx, dy = np.subtract(p1, p0)
    L = np.hypot(dx, dy)
    c, s = dx / L, dy / L
    r = np.array([[c, s, 0], [-s, c, 0], [0, 0, 1.0]])
    T = block_diag(r, r)
    return T.T @ k_local @ T


def frame_split(spec: FrameSpec) -> tuple[np.ndarray, np.ndarray]:
    """Axial and bending parts of the frame stiffness in local node frames."""
    verts = upright_vertices(spec.d)
    q = node_frames(verts)
    parts = []
    for key in ("axial", "bend"):
        kg = np.zeros((9, 9))
        for i, j in ((0, 1), (0, 2), (1, 2)):
            ke = beam_element_stiffness(spec.E, spec.A_s, spec.I, spec.d)[key]
            idx = [3 * i, 3 * i + 1, 3 * i + 2, 3 * j, 3 * j + 1, 3 * j + 2]
            kg[np.ix_(idx, idx)] += _beam_to_global(ke, verts[i], verts[j])
        parts.append(q.T @ kg @ q)
    return parts[0], parts[1]


def assemble_frame(spec: FrameSpec) -> np.ndarray:
    k_axial, k_bend = frame_split(spec)
    return k_axial + k_bend


def closed_form_blocks(spec: FrameSpec) -> dict[str, BlockPair]:
    """Hand-derived A and B blocks of the frame, split by mechanism."""
    E, A_s, I, d = spec.E, spec.A_s, spec.I, spec.d
    ea, ei = E * A_s, E * I
    A_axial = ea * np.array([[3 / (2 * d), 0, 0], [0, 1 / (2 * d), 0], [0, 0, 0]])
    A_bend = ei * np.array(
        [
            [6 / d**3, 0, 0],
            [0, 18 / d**3, -6 * SQRT3 / d**2],
            [0, -6 * SQRT3 / d**2, 8 / d],
        ]
    )
    B_axial = ea * np.array(
        [
            [3 / (4 * d), SQRT3 / (4 * d), 0],
            [-SQRT3 / (4 * d), -1 / (4 * d), 0],
            [0, 0, 0],
        ]
    )
    B_bend = ei * np.array(
        [
            [-3 / d**3, 3 * SQRT3 / d**3, -3 / d**2],
            [-3 * SQRT3 / d**3, 9 / d**3, -3 * SQRT3 / d**2],
            [3 / d**2, -3 * SQRT3 / d**2, 2 / d],
        ]
    )
    return {"axial": BlockPair(A_axial, B_axial), "bend": BlockPair(A_bend, B_bend)}


@dataclass(frozen=True)
class RankReport:
    rank_axial: int
    rank_bend: int
    homogeneous_extension_energy: float
    drilling_residual: float


def mode_rank_report(spec: FrameSpec, tol: float = 1e-9) -> RankReport:
    k_axial, k_bend = frame_split(spec)
    v = HOMOGENEOUS_EXTENSION
    return RankReport(
        rank_axial=numerical_rank(k_axial, tol),
        rank_bend=numerical_rank(k_bend, tol),
        homogeneous_extension_energy=float(v @ k_bend @ v),
        drilling_residual=float(np.abs(k_axial @ DRILLING_VECTORS).max()),
    )
