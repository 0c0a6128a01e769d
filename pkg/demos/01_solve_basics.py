"""Solve a tiny semidefinite program straight from its canonical data.

The problem: largest eigenvalue of diag(1, 2) written as
    maximize Tr(X S)  s.t.  Tr S = 1,  S >= 0
which in canonical form is  min <-X, S>  s.t.  <I, S> = 1,  S in the PSD cone.
"""

import numpy as np

from qsdp import BlockStructure, ConeProblem, SolverConfig, SymBlockMat, dimacs_errors, solve

structure = BlockStructure(sdp_blocks=(2,))
lift = lambda m: SymBlockMat(structure, [np.asarray(m, dtype=float)])

problem = ConeProblem(
    c_obj=lift(-np.diag([1.0, 2.0])),
    constraints=[lift(np.eye(2))],
    rhs=[1.0],
)

print("Solving the largest-eigenvalue program for X = diag(1, 2) ...")
solution, log = solve(problem, SolverConfig(direction="hkm"))

print("\nPer-iteration progress (predictor-corrector interior point):")
print(log.to_text())

print(f"\nstatus        : {solution.status} ({solution.status_label})")
print(f"primal value  : {solution.primal_value:.9f}   (expected -2)")
print(f"dual value    : {solution.dual_value:.9f}")
print(f"gap           : {solution.stats['gap']:.2e}")
print("optimal S     :")
print(np.array_str(solution.x_primal.blocks[0], precision=6, suppress_small=True))

print("\nDIMACS error measures:")
for name, err in zip(["err1", "err2", "err3", "err4", "err5", "err6"], dimacs_errors(problem, solution)):
    print(f"  {name} = {err:.3e}")

# the same engine with the Nesterov-Todd scaling
solution_nt, _ = solve(problem, SolverConfig(direction="nt"))
print(f"\nNT direction reaches the same optimum: {solution_nt.dual_value:.9f}")
