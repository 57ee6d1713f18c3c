"""A triangular frame of three beams as a model for the gasket.

The frame stiffness splits into an axial part (rank 3) and a bending part
(rank 5).  The axial part ignores drilling rotations; the bending part
ignores a uniform radial expansion of the three corners.
"""

import numpy as np

from fractalstiff.framelab import (
    DRILLING_VECTORS,
    HOMOGENEOUS_EXTENSION,
    FrameSpec,
    assemble_frame,
    check_equilibrium,
    frame_split,
    mode_rank_report,
    split_blocks,
)

np.set_printoptions(precision=5, suppress=True)

spec = FrameSpec(E=1.0, A_s=1.0, I=1.0, d=1.0)
k_axial, k_bend = frame_split(spec)

print("axial A block:\n", split_blocks(k_axial).A)
print("bending A block:\n", split_blocks(k_bend).A)

rep = mode_rank_report(spec)
print(f"rank axial = {rep.rank_axial}, rank bending = {rep.rank_bend}")
print("|K_bend . extension|  =", np.abs(k_bend @ HOMOGENEOUS_EXTENSION).max())
print("|K_axial . drilling|  =", np.abs(k_axial @ DRILLING_VECTORS).max())
print("equilibrium residual  =", check_equilibrium(assemble_frame(spec), spec.d))

# doubling the side halves the axial stiffness and divides bending by 8
big = FrameSpec(spec.E, spec.A_s, spec.I, 2 * spec.d)
ax2, bd2 = frame_split(big)
print("axial ratio   =", ax2[0, 0] / k_axial[0, 0])
print("bending ratio =", bd2[0, 0] / k_bend[0, 0])
