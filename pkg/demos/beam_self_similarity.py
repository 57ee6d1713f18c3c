"""Beam stiffness from symmetry, equilibrium and self-similarity alone.

Two copies of a parametrized beam are joined end to end and the middle node
is condensed out.  Asking the doubled beam to have the same non-dimensional
stiffness as the original fixes c/a = L^2/3 and a stiffness ratio of 1/8.
"""

import numpy as np

from fractalstiff.beamlab import (
    BeamParams,
    condense_double_beam,
    euler_bernoulli_stiffness,
    recovered_classical_stiffness,
    solve_beam_self_similarity,
)

np.set_printoptions(precision=6, suppress=True)

L = 1.0
rep = solve_beam_self_similarity(L)
print(f"c/a = {rep.c_over_a:.12f}   (L^2/3 = {L**2 / 3:.12f})")
print(f"stiffness ratio per doubling = {rep.scaling:.12f}")

# away from the fixed point, doubling changes the shape of the matrix
for gamma in (0.2, 1 / 3, 0.5):
    K2 = condense_double_beam(BeamParams(1.0, gamma * L**2, L))
    print(f"gamma = {gamma:.4f}: doubled c/(a (2L)^2) = {K2[1, 1] / K2[0, 0] / (2 * L) ** 2:.6f}")

# the fixed point with a = 12 EI / L^3 is the textbook beam element
EI = 2.5
K = recovered_classical_stiffness(EI, L)
print("max |K - K_euler| =", np.abs(K - euler_bernoulli_stiffness(EI, L)).max())
print(K)
