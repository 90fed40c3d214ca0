"""Schrodinger flow on the unit sphere of C^d."""

import numpy as np

from prequant import energy_expectation, projective_distance, propagate, tangency_defect, unitarity_defect
from prequant.quantum import random_hermitian, random_unit_state

rng = np.random.default_rng(7)
H = random_hermitian(4, rng)
psi0 = random_unit_state(4, rng)
w, V = H.eigh()
print("spectrum:", np.round(w, 6))
e0 = energy_expectation(H, psi0)
for t in (0.5, 2.0, 20.0):
    psi = propagate(H, psi0, t)
    print(f"t={t:5}: |psi|-1 = {np.linalg.norm(psi) - 1:+.1e}  energy shift {energy_expectation(H, psi) - e0:+.1e}  "
          f"tangency {tangency_defect(H, psi):.1e}  unitarity {unitarity_defect(H, t):.1e}")
print("eigenvector stays on its ray:", projective_distance(propagate(H, V[:, 0], 20.0), V[:, 0]))
