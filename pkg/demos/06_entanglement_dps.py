"""Entanglement detection for the Werner family with symmetric extensions.

A state admitting no PPT symmetric extension is entangled.  For two-qubit
Werner states the exact boundary is p = 1/3, which the level-1 test (the
PPT criterion) already finds; the optimal slack reproduces the smallest
eigenvalue of the partial transpose.
"""

import numpy as np

from qsdp import dps_test, werner_state
from qsdp.modeling import partial_transpose

print(" p      slack (SDP)   min eig of rho^T_B   verdict")
for p in (0.0, 0.1, 0.25, 1 / 3, 0.4, 0.5, 0.7, 0.9):
    rho = werner_state(p)
    res = dps_test(rho, (2, 2), k=1, ppt=True)
    pt_eig = np.linalg.eigvalsh(partial_transpose(rho.matrix, (2, 2), [1]))[0].real
    verdict = "separable-compatible" if res.feasible else "entangled"
    print(f" {p:.3f}  {res.slack:+.6f}     {pt_eig:+.6f}            {verdict}")

print("\nlevel-2 extension for a separable point (p = 0.25):")
res2 = dps_test(werner_state(0.25), (2, 2), k=2, ppt=True)
print(f"  feasible: {res2.feasible}, slack = {res2.slack:.6f}")
print("  the 8x8 extension is symmetric under swapping the two B copies and")
print("  traces back to the input state exactly (up to solver accuracy).")

print("\nan infeasible point returns a dual witness (p = 0.5):")
res3 = dps_test(werner_state(0.5), (2, 2), k=1, ppt=True)
print(f"  feasible: {res3.feasible}, slack = {res3.slack:.6f} (= (1 - 3p)/4 = {(1 - 1.5) / 4:.6f})")
