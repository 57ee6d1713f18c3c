"""Two gasket elements sharing a vertex, loaded at the top corners.

Reads the structure file next to this script, solves for nodal displacements
and rotations, and refines the interior of the left element two levels deep.
"""

from pathlib import Path

import numpy as np

from fractalstiff.assembler import refine_interior, solve_displacements
from fractalstiff.structfile import read_structure

np.set_printoptions(precision=5, suppress=True)

model, node_ids, elem_ids = read_structure(Path(__file__).with_name("two_triangles.struct"))
field = solve_displacements(model)

for nid, u, r in zip(node_ids, field.nodal, field.reactions):
    print(f"{nid}: u = {u}  reaction = {r}")
for eid, e in zip(elem_ids, field.per_element_energy):
    print(f"energy[{eid}] = {e:.6f}")
print(f"total energy = {field.energy:.6f}")

ref = refine_interior(model, field, elem_ids.index("left"), levels=2)
print(f"\n{ref.n_vertices} interior vertices from {ref.applications} recovery steps")
for level, verts in enumerate(ref.levels, start=1):
    print(f"level {level}:")
    for v in verts:
        print(f"  ({v.position[0]:+.4f}, {v.position[1]:+.4f})  u = {np.array(v.displacement)}")
