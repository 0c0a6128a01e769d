"""Canonical conic problem data and its validation.

A :class:`ConeProblem` stores the data (C, {A_i}, b) of

    minimize  <C, X>   subject to  <A_i, X> = b_i,  X in K,

where K is the mixed cone described by a :class:`BlockStructure`.  The same
data read the other way is the dual problem  max b'y  s.t.  C - sum y_i A_i
in K*.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blockmat import BlockStructure, SymBlockMat, frobenius_inner


@dataclass
class ConeProblem:
    c_obj: SymBlockMat
    constraints: list[SymBlockMat]
    rhs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rhs = np.asarray(self.rhs, dtype=float)
        if self.rhs.shape != (len(self.constraints),):
            raise ValueError("rhs length must match the number of constraints")
        for k, a in enumerate(self.constraints):
            if a.structure != self.structure:
                raise ValueError(f"constraint {k} does not share the objective's structure")

    @property
    def structure(self) -> BlockStructure:
        return self.c_obj.structure

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def apply(self, x: SymBlockMat) -> np.ndarray:
        """Constraint map A(X) = (<A_i, X>)_i."""
        return np.array([frobenius_inner(a, x) for a in self.constraints])

    def adjoint(self, y: np.ndarray) -> SymBlockMat:
        """Adjoint map A*(y) = sum_i y_i A_i."""
        out = SymBlockMat.zeros(self.structure)
        for yi, a in zip(y, self.constraints):
            if yi != 0.0:
                out = out + float(yi) * a
        return out

    def stacked_rows(self) -> np.ndarray:
        """Dense m x dim matrix whose rows are the vectorized A_i."""
        rows = []
        for a in self.constraints:
            parts = [b.reshape(-1) for b in a.blocks] + [a.nonneg, a.free]
            rows.append(np.concatenate(parts) if parts else np.zeros(0))
        return np.vstack(rows) if rows else np.zeros((0, 0))


@dataclass
class ValidationReport:
    m: int
    rank: int
    dependent_indices: list[int]
    duplicate_pairs: list[tuple[int, int]]
    coeff_min: float
    coeff_max: float
    scaling_warning: bool

    @property
    def independent(self) -> bool:
        return not self.dependent_indices


def validate_problem(p: ConeProblem, spread_limit: float = 1e8) -> ValidationReport:
    """Report-only diagnostics: constraint rank, dependencies, coefficient spread.

    Dependent constraints are named by index via a pivoted QR of the Gram
    matrix of the stacked vec(A_i).
    """
    m = p.num_constraints
    dependent: list[int] = []
    duplicates: list[tuple[int, int]] = []
    rank = 0
    if m:
        rows = p.stacked_rows()
        norms = np.linalg.norm(rows, axis=1)
        gram = rows @ rows.T
        # order-respecting Gram-Schmidt: a constraint dependent on earlier ones
        # is the one that gets flagged
        basis: list[np.ndarray] = []
        for i in range(m):
            v = rows[i].copy()
            for q in basis:
                v -= (q @ v) * q
            if np.linalg.norm(v) <= 1e-12 * max(norms[i], 1.0):
                dependent.append(i)
            else:
                basis.append(v / np.linalg.norm(v))
        rank = len(basis)
        # exact duplicates up to scaling, reported pairwise
        for i in range(m):
            for j in range(i + 1, m):
                if norms[i] == 0 or norms[j] == 0:
                    continue
                c = gram[i, j] / (norms[i] * norms[j])
                if abs(abs(c) - 1.0) < 1e-12:
                    duplicates.append((i, j))

    entries = []
    for a in [p.c_obj] + p.constraints:
        for b in a.blocks:
            entries.append(b[np.abs(b) > 0])
        entries.append(a.nonneg[np.abs(a.nonneg) > 0])
        entries.append(a.free[np.abs(a.free) > 0])
    entries.append(p.rhs[np.abs(p.rhs) > 0])
    flat = np.concatenate([e.reshape(-1) for e in entries]) if entries else np.zeros(0)
    if flat.size:
        cmin, cmax = float(np.min(np.abs(flat))), float(np.max(np.abs(flat)))
    else:
        cmin = cmax = 0.0
    warning = cmin > 0 and cmax / cmin > spread_limit
    return ValidationReport(m, rank, dependent, duplicates, cmin, cmax, warning)


def require_independent(p: ConeProblem):
    """Raise when constraints are linearly dependent, naming the offending index."""
    rep = validate_problem(p)
    if not rep.independent:
        k = rep.dependent_indices[0]
        name = ""
        names = p.meta.get("constraint_names")
        if names and k < len(names):
            name = f" ({names[k]})"
        raise ValueError(
            f"constraint {k}{name} is linearly dependent on the others "
            f"(rank {rep.rank} < m = {rep.m}); remove or merge it before solving"
        )


# termination codes, following the usual solver convention
STATUS_SUCCESS = 0
STATUS_PRIMAL_INFEASIBLE = 1  # heuristic suspicion
STATUS_DUAL_INFEASIBLE = 2  # heuristic suspicion
STATUS_LACK_OF_PROGRESS = -1
STATUS_NUMERICAL_FAILURE = -3
STATUS_ITERATION_LIMIT = -6

STATUS_LABELS = {
    STATUS_SUCCESS: "success",
    STATUS_PRIMAL_INFEASIBLE: "primal infeasibility suspected",
    STATUS_DUAL_INFEASIBLE: "dual infeasibility suspected",
    STATUS_LACK_OF_PROGRESS: "lack of progress",
    STATUS_NUMERICAL_FAILURE: "numerical failure",
    STATUS_ITERATION_LIMIT: "iteration limit reached",
}


@dataclass
class Solution:
    x_primal: SymBlockMat
    y_dual: np.ndarray
    z_slack: SymBlockMat
    primal_value: float
    dual_value: float
    status: int
    stats: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.status == STATUS_SUCCESS

    @property
    def status_label(self) -> str:
        return STATUS_LABELS.get(self.status, f"unknown ({self.status})")

    @property
    def gap(self) -> float:
        return self.stats.get("gap", float("nan"))
