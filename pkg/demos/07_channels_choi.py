"""Channels as matrices: the output-input Choi operator and channel SDPs.

Complete positivity of a map is plain positive semidefiniteness of its Choi
matrix, and trace preservation is one partial-trace identity, so searching
over channels is just another SDP.
"""

import numpy as np

from qsdp import apply_choi, channel_feasibility, choi_of_channel
from qsdp.quantum import random_pure, swap_operator

print("identity channel on a qubit:")
j_id = choi_of_channel([np.eye(2)], 2)
print(np.real(j_id.matrix))
print(f"  trace preserving: {j_id.is_trace_preserving}  (Tr_out J = I)")
rho = random_pure(np.random.default_rng(0), 2)
print(f"  apply recovers the state exactly: {np.max(np.abs(apply_choi(j_id, rho) - rho.matrix)):.2e}")

print("\ncompletely depolarizing channel: J = I/2 (x) I")
j_dep = choi_of_channel(lambda r: np.trace(r) * np.eye(2) / 2, 2)
print(np.real(j_dep.matrix))

print("\nthe transpose map is positive but not completely positive:")
j_t = choi_of_channel(lambda r: r.T, 2)
print(f"  its Choi matrix is the SWAP operator: {np.allclose(j_t.matrix, swap_operator((2, 2), 0, 1))}")
out = channel_feasibility(2, fixed_choi=j_t.matrix)
print(f"  membership test in the channel set: feasible = {out['feasible']}, slack = {out['slack']:.4f}")

print("\nbest output overlap with an observable M over all channels:")
m_obs = np.diag([1.0, 3.0])
out = channel_feasibility(2, objective=np.kron(m_obs, (rho.matrix / 1.0).T))
print(f"  optimum {out['value']:.6f} equals lambda_max(M) = {np.linalg.eigvalsh(m_obs)[-1]:.6f}")

print("\nPPT-preserving channels cannot prepare a singlet:")
phi = np.zeros(4)
phi[0] = phi[3] = 1 / np.sqrt(2)
objective = np.kron(np.outer(phi, phi), np.eye(4) / 4.0)
free = channel_feasibility(4, objective=objective)
constrained = channel_feasibility(4, objective=objective, ppt_preserving_dims=(2, 2, 2, 2))
print(f"  free channels reach singlet fraction {free['value']:.6f}")
print(f"  PPT-preserving channels cap at       {constrained['value']:.6f}  (= 1/2)")
