"""Self-similar stiffness of the Sierpinski gasket.

Three copies of a gasket are joined into a gasket of twice the side and the
mid-side vertices are condensed.  Fixed points of that map are searched from
random starts; two of them are positive semidefinite: an axial mechanism
(ratio 0.5 per doubling) and a bending mechanism (ratio 0.15).
"""

import time

import numpy as np

from fractalstiff import gasket

np.set_printoptions(precision=6, suppress=True)

t0 = time.perf_counter()
report = gasket.random_restart_search(seed=1, n_restarts=200)
print(f"{len(report.solutions)} distinct fixed points, {report.n_failed} failed starts, "
      f"{time.perf_counter() - t0:.1f} s")

for sol in report.solutions:
    print(f"\n{sol.mode.value}: scaling {sol.scaling:.9f}, rank {sol.rank}, "
          f"min eigenvalue {sol.min_eigenvalue:.3g}, physical {sol.physical}")
    print("alpha =\n", sol.blocks.alpha_matrix())
    print("beta =\n", sol.blocks.beta_matrix())

# the bending ratio after two doublings follows the power law kappa(rho) = kappa2^log2(rho)
bend = gasket.bending_mode()
res = gasket.assemble_and_condense(bend.blocks.to_params())
res2 = gasket.condense_stiffness(res.K_hat, res.d_hat)
print("\nratio after two doublings:", res2.K_hat[0, 0], " law:", gasket.scaling_law(bend.scaling, 4.0))
