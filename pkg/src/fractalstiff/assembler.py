"""Flat structures tiled from gasket triangles joined at their vertices.

Each element is an equilateral gasket whose stiffness is the sum of the axial
and bending mechanisms, weighted by the material amplitudes ``a1_axial`` and
``a1_bend`` (leading stiffness coefficients at the element's own side).  DOFs
per node are ``u_x, u_y, theta_z`` in global components.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import gasket
from .errors import ArgumentError, GeometryError
from .framelab import node_frames, upright_vertices
from .gasket import Mode
from .matrixcore import solve_sym

GEOMTOL = 1e-9


@dataclass(frozen=True)
class Material:
    a1_axial: float
    a1_bend: float

    def __post_init__(self):
        if self.a1_axial < 0 or self.a1_bend < 0:
            raise ArgumentError("mode amplitudes must be non-negative")
        if not (self.a1_axial > 0 or self.a1_bend > 0):
            raise ArgumentError("at least one mode amplitude must be positive")


@dataclass(frozen=True)
class Element:
    nodes: tuple[int, int, int]
    top: int | None = None  # node index used as the element's top vertex


@dataclass
class StructureModel:
    nodes: np.ndarray
    elements: list[Element]
    material: Material
    supports: list[tuple[int, tuple[bool, bool, bool]]] = field(default_factory=list)
    loads: list[tuple[int, float, float, float]] = field(default_factory=list)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        self.elements = [e if isinstance(e, Element) else Element(tuple(e)) for e in self.elements]

    @property
    def n_dofs(self) -> int:
        return 3 * len(self.nodes)

    def validate(self, require_supports: bool = True) -> None:
        n = len(self.nodes)
        for k, e in enumerate(self.elements):
            if len(set(e.nodes)) != 3 or any(not 0 <= i < n for i in e.nodes):
                raise GeometryError(f"element {k}: bad node indices {e.nodes}")
            if e.top is not None and e.top not in e.nodes:
                raise GeometryError(f"element {k}: top node {e.top} not in {e.nodes}")
            sides = side_lengths(self.nodes[list(e.nodes)])
            if (sides.max() - sides.min()) > GEOMTOL * sides.mean():
                raise GeometryError(f"element {k} is not equilateral: sides {sides}")
        for node, _ in self.supports:
            if not 0 <= node < n:
                raise GeometryError(f"support on unknown node {node}")
        for node, *_ in self.loads:
            if not 0 <= node < n:
                raise GeometryError(f"load on unknown node {node}")
        if require_supports and constrained_dofs(self).size < 3:
            raise GeometryError("at least 3 constrained DOFs are needed")


def side_lengths(tri) -> np.ndarray:
    tri = np.asarray(tri, dtype=float)
    return np.array([np.linalg.norm(tri[i] - tri[(i + 1) % 3]) for i in range(3)])


def oriented_nodes(model: StructureModel, element: Element) -> tuple[int, int, int]:
    """Element nodes counter-clockwise, starting at the top vertex.

    The top vertex defaults to the smallest node index.
    """
    nodes = list(element.nodes)
    top = element.top if element.top is not None else min(nodes)
    k = nodes.index(top)
    nodes = nodes[k:] + nodes[:k]
    p = model.nodes[nodes]
    cross = (p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[1, 1] - p[0, 1]) * (p[2, 0] - p[0, 0])
    if cross < 0:
        nodes[1], nodes[2] = nodes[2], nodes[1]
    return tuple(nodes)


def local_mode_stiffness(material: Material, d: float) -> np.ndarray:
    """Mode-sum stiffness in local corner frames."""
    K = np.zeros((9, 9))
    if material.a1_axial:
        K += gasket.mode_stiffness(Mode.AXIAL, material.a1_axial, d)
    if material.a1_bend:
        K += gasket.mode_stiffness(Mode.BENDING, material.a1_bend, d)
    return K


def element_total_stiffness(material: Material, d: float, vertices=None) -> np.ndarray:
    """9x9 global-component stiffness of one gasket element.

    ``vertices`` (counter-clockwise, top first) fixes the orientation; the
    default is the upright triangle of side ``d``.
    """
    if not d > 0:
        raise ArgumentError("d must be positive")
    if vertices is None:
        vertices = upright_vertices(d)
    Q = node_frames(vertices)
    return Q @ local_mode_stiffness(material, d) @ Q.T


def element_dofs(nodes) -> np.ndarray:
    return np.array([3 * n + k for n in nodes for k in range(3)])


@dataclass(frozen=True)
class GlobalSystem:
    K: np.ndarray
    element_nodes: list[tuple[int, int, int]]
    element_dofs: list[np.ndarray]
    element_stiffness: list[np.ndarray]


def assemble_global(model: StructureModel) -> GlobalSystem:
    model.validate(require_supports=False)
    K = np.zeros((model.n_dofs, model.n_dofs))
    enodes, edofs, eks = [], [], []
    for e in model.elements:
        nodes = oriented_nodes(model, e)
        verts = model.nodes[list(nodes)]
        d = side_lengths(verts).mean()
        ke = element_total_stiffness(model.material, d, verts)
        dofs = element_dofs(nodes)
        K[np.ix_(dofs, dofs)] += ke
        enodes.append(nodes)
        edofs.append(dofs)
        eks.append(ke)
    return GlobalSystem(K, enodes, edofs, eks)


def constrained_dofs(model: StructureModel) -> np.ndarray:
    out = set()
    for node, mask in model.supports:
        out.update(3 * node + k for k in range(3) if mask[k])
    return np.array(sorted(out), dtype=int)


def load_vector(model: StructureModel) -> np.ndarray:
    F = np.zeros(model.n_dofs)
    for node, fx, fy, mz in model.loads:
        F[3 * node : 3 * node + 3] += (fx, fy, mz)
    return F


@dataclass(frozen=True)
class SolutionField:
    nodal: np.ndarray  # (n_nodes, 3): u_x, u_y, theta_z
    reactions: np.ndarray  # (n_nodes, 3), non-zero only at supports
    energy: float
    per_element_energy: list[float]


def solve_system(K: np.ndarray, F: np.ndarray, fixed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``K u = F + r`` with ``u = 0`` on ``fixed``; returns ``u`` and reactions ``r``."""
    n = K.shape[0]
    free = np.setdiff1d(np.arange(n), fixed)
    u = np.zeros(n)
    if free.size:
        u[free] = solve_sym(K[np.ix_(free, free)], F[free][:, None])[:, 0]
    r = K @ u - F
    r[free] = 0.0
    return u, r


def solve_displacements(model: StructureModel) -> SolutionField:
    model.validate()
    system = assemble_global(model)
    u, r = solve_system(system.K, load_vector(model), constrained_dofs(model))
    per_element = [
        0.5 * float(u[dofs] @ ke @ u[dofs])
        for dofs, ke in zip(system.element_dofs, system.element_stiffness)
    ]
    return SolutionField(
        nodal=u.reshape(-1, 3),
        reactions=r.reshape(-1, 3),
        energy=0.5 * float(u @ system.K @ u),
        per_element_energy=per_element,
    )


# --- interior recursion -----------------------------------------------------


def mode_scalings() -> tuple[float, float]:
    """Stiffness ratio per side doubling for the axial and bending mechanisms."""
    return gasket.axial_mode().scaling, gasket.bending_mode().scaling


def sub_material(material: Material) -> Material:
    """Material amplitudes of the half-size copies inside an element."""
    ka, kb = mode_scalings()
    return Material(material.a1_axial / ka, material.a1_bend / kb)


@functools.lru_cache(maxsize=256)
def _recovery(a1_axial: float, a1_bend: float, d: float) -> np.ndarray:
    sub = sub_material(Material(a1_axial, a1_bend))
    return gasket.condense_stiffness(local_mode_stiffness(sub, d / 2), d / 2).recovery


def two_level_stiffness(material: Material, d: float) -> gasket.GasketCondensation:
    """Upright element of side ``d`` modelled as three half-size copies, condensed."""
    sub = sub_material(material)
    return gasket.condense_stiffness(local_mode_stiffness(sub, d / 2), d / 2)


def _orientation(vertices: np.ndarray) -> float:
    c = vertices.mean(axis=0)
    e = vertices[0] - c
    return math.atan2(e[1], e[0]) - math.pi / 2


def _node_rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    r = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return np.kron(np.eye(3), r)


@dataclass(frozen=True)
class InteriorVertex:
    level: int
    position: tuple[float, float]
    displacement: tuple[float, float, float]


@dataclass
class Refinement:
    element: int
    levels: list[list[InteriorVertex]]
    applications: int = 0

    @property
    def n_vertices(self) -> int:
        return sum(len(lv) for lv in self.levels)


def refine_interior(model: StructureModel, field: SolutionField, element: int, levels: int) -> Refinement:
    """Displacements of fractal vertices inside one element, level by level.

    Level 1 holds the three mid-side vertices of the element, level 2 the nine
    mid-side vertices of its three sub-triangles, and so on.  Each step applies
    the condensation recovery operator of the half-size assembly, with every
    mechanism's amplitude divided by its own scaling ratio per halving.
    """
    if levels < 1:
        raise ArgumentError("levels must be at least 1")
    nodes = oriented_nodes(model, model.elements[element])
    verts = model.nodes[list(nodes)]
    theta = _orientation(verts)
    rot = _node_rotation(theta)  # reference (upright) components -> global
    u0 = field.nodal[list(nodes)].reshape(-1)
    out = Refinement(element, [[] for _ in range(levels)])
    d0 = side_lengths(verts).mean()

    stack = [(verts, rot.T @ u0, model.material, d0, 1)]
    # breadth-first keeps the fixed top / lower-left / lower-right order per level
    while stack:
        nxt = []
        for v, u_ref, mat, d, lev in stack:
            mid_ref = _recovery(mat.a1_axial, mat.a1_bend, d) @ u_ref
            out.applications += 1
            mid_pos = (
                (v[0] + v[2]) / 2,  # I' on IK
                (v[0] + v[1]) / 2,  # J' on IJ
                (v[1] + v[2]) / 2,  # K' on JK
            )
            mid_glob = rot @ mid_ref
            for k in range(3):
                out.levels[lev - 1].append(
                    InteriorVertex(
                        lev,
                        (float(mid_pos[k][0]), float(mid_pos[k][1])),
                        tuple(float(t) for t in mid_glob[3 * k : 3 * k + 3]),
                    )
                )
            if lev < levels:
                corner = u_ref.reshape(3, 3)
                mid = mid_ref.reshape(3, 3)
                sub = sub_material(mat)
                children = (
                    ((v[0], mid_pos[1], mid_pos[0]), (corner[0], mid[1], mid[0])),
                    ((mid_pos[1], v[1], mid_pos[2]), (mid[1], corner[1], mid[2])),
                    ((mid_pos[0], mid_pos[2], v[2]), (mid[0], mid[2], corner[2])),
                )
                for cv, cu in children:
                    nxt.append((np.array(cv), np.concatenate(cu), sub, d / 2, lev + 1))
        stack = nxt
    return out


def rotate_model(model: StructureModel, phi: float) -> StructureModel:
    """Rigidly rotate node coordinates and load vectors by ``phi`` (radians)."""
    c, s = math.cos(phi), math.sin(phi)
    r = np.array([[c, -s], [s, c]])
    loads = []
    for node, fx, fy, mz in model.loads:
        f = r @ np.array([fx, fy])
        loads.append((node, float(f[0]), float(f[1]), mz))
    return StructureModel(
        nodes=model.nodes @ r.T,
        elements=list(model.elements),
        material=model.material,
        supports=list(model.supports),
        loads=loads,
    )
