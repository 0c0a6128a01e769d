"""Alternating (see-saw) lower bounds over states and measurements.

Every alternation step is a small SDP solved with the interior-point engine:
states are optimized with measurements fixed and vice versa.  The method
yields lower bounds only; restarting from fresh random points improves the
chance of hitting the global optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .modeling import MatExpr, Model, partial_trace
from .npa import haar_projector, haar_state


def _max_density(op: np.ndarray, cfg=None):
    """maximize Tr(op rho) over density matrices."""
    d = op.shape[0]
    model = Model()
    rho = model.declare(d, structure="hermitian", field="complex", name="rho")
    model.add_lmi(rho.expr())
    model.add_equality(rho.trace(), 1.0)
    model.maximize(rho.expr().frobenius_with(op.conj().T))
    res = model.compile(framing="dual", equality_mode="eliminate").solve(cfg)
    if not res.success:
        raise RuntimeError(f"state step failed: {res.solution.status_label}")
    return res.value, res.values["rho"]


def _max_effect(op: np.ndarray, cfg=None):
    """maximize Tr(op M) over effects 0 <= M <= I."""
    d = op.shape[0]
    model = Model()
    m = model.declare(d, structure="hermitian", field="complex", name="M")
    model.add_lmi(m.expr())
    model.add_lmi(MatExpr((d, d), np.eye(d)) - m.expr())
    model.maximize(m.expr().frobenius_with(op.conj().T))
    res = model.compile(framing="dual", equality_mode="free_split").solve(cfg)
    if not res.success:
        raise RuntimeError(f"measurement step failed: {res.solution.status_label}")
    return res.value, res.values["M"]


def _hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2.0


@dataclass
class BellSeesawTask:
    """Two-party Bell functional with binary-outcome projective settings."""

    bell: dict  # (a, b, x, y) -> coefficient
    dims: tuple[int, int] = (2, 2)
    n_settings: tuple[int, int] = (2, 2)

    def random_point(self, rng):
        d_a, d_b = self.dims
        state = haar_state(rng, d_a * d_b)
        meas_a = [haar_projector(rng, d_a, 1) for _ in range(self.n_settings[0])]
        meas_b = [haar_projector(rng, d_b, 1) for _ in range(self.n_settings[1])]
        return {"state": state, "A": meas_a, "B": meas_b}

    def objective(self, point) -> float:
        d_a, d_b = self.dims
        rho = point["state"]
        total = 0.0
        for (a, b, x, y), alpha in self.bell.items():
            ea = point["A"][x] if a == 0 else np.eye(d_a) - point["A"][x]
            fb = point["B"][y] if b == 0 else np.eye(d_b) - point["B"][y]
            total += alpha * np.real(np.trace(rho @ np.kron(ea, fb)))
        return float(total)

    def bell_operator(self, point) -> np.ndarray:
        d_a, d_b = self.dims
        g = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
        for (a, b, x, y), alpha in self.bell.items():
            ea = point["A"][x] if a == 0 else np.eye(d_a) - point["A"][x]
            fb = point["B"][y] if b == 0 else np.eye(d_b) - point["B"][y]
            g += alpha * np.kron(ea, fb)
        return _hermitize(g)

    def sweep(self, point, cfg=None):
        d_a, d_b = self.dims
        rho = point["state"]
        # Alice settings
        for x in range(self.n_settings[0]):
            k = np.zeros((d_a, d_a), dtype=complex)
            for (a, b, xx, y), alpha in self.bell.items():
                if xx != x:
                    continue
                sign = 1.0 if a == 0 else -1.0
                fb = point["B"][y] if b == 0 else np.eye(d_b) - point["B"][y]
                k += sign * alpha * partial_trace(np.kron(np.eye(d_a), fb) @ rho, (d_a, d_b), keep=[0])
            _, point["A"][x] = _max_effect(_hermitize(k), cfg)
        # Bob settings
        for y in range(self.n_settings[1]):
            k = np.zeros((d_b, d_b), dtype=complex)
            for (a, b, x, yy), alpha in self.bell.items():
                if yy != y:
                    continue
                sign = 1.0 if b == 0 else -1.0
                ea = point["A"][x] if a == 0 else np.eye(d_a) - point["A"][x]
                k += sign * alpha * partial_trace(np.kron(ea, np.eye(d_b)) @ rho, (d_a, d_b), keep=[1])
            _, point["B"][y] = _max_effect(_hermitize(k), cfg)
        # shared state
        _, point["state"] = _max_density(self.bell_operator(point), cfg)
        return point


@dataclass
class PamSeesawTask:
    """Prepare-and-measure functional sum beta_{b,x,y} Tr(rho_x M^b_y) with
    binary measurements."""

    witness: dict  # (b, x, y) -> coefficient
    dim: int = 2
    n_preparations: int = 4
    n_meas: int = 2
    fixed_states: list | None = None

    def random_point(self, rng):
        states = (
            [s.copy() for s in self.fixed_states]
            if self.fixed_states is not None
            else [haar_state(rng, self.dim) for _ in range(self.n_preparations)]
        )
        meas = [haar_projector(rng, self.dim, 1) for _ in range(self.n_meas)]
        return {"states": states, "M": meas}

    def objective(self, point) -> float:
        total = 0.0
        for (b, x, y), beta in self.witness.items():
            m = point["M"][y] if b == 0 else np.eye(self.dim) - point["M"][y]
            total += beta * np.real(np.trace(point["states"][x] @ m))
        return float(total)

    def sweep(self, point, cfg=None):
        for y in range(self.n_meas):
            k = np.zeros((self.dim, self.dim), dtype=complex)
            for (b, x, yy), beta in self.witness.items():
                if yy != y:
                    continue
                k += (1.0 if b == 0 else -1.0) * beta * point["states"][x]
            _, point["M"][y] = _max_effect(_hermitize(k), cfg)
        if self.fixed_states is None:
            for x in range(self.n_preparations):
                k = np.zeros((self.dim, self.dim), dtype=complex)
                for (b, xx, y), beta in self.witness.items():
                    if xx != x:
                        continue
                    m = point["M"][y] if b == 0 else np.eye(self.dim) - point["M"][y]
                    k += beta * m
                _, point["states"][x] = _max_density(_hermitize(k), cfg)
        return point


@dataclass
class SeesawOutcome:
    value: float
    point: dict
    trajectory: list[float]
    restart_values: list[float] = field(default_factory=list)

    @property
    def states(self):
        return self.point.get("states", self.point.get("state"))

    @property
    def measurements(self):
        return {k: v for k, v in self.point.items() if k in ("A", "B", "M")}


def seesaw(task, restarts: int = 20, seed: int = 0, cfg=None, max_alternations: int = 200, rel_tol: float = 1e-8):
    """Best lower bound over random restarts of alternating maximization.

    Within one restart the trajectory of exact objective values is monotone
    non-decreasing up to inner-solver accuracy; alternation stops when the
    relative improvement drops below ``rel_tol`` or the cap is reached.
    """
    rng = np.random.default_rng(seed)
    best: SeesawOutcome | None = None
    restart_values = []
    for _ in range(max(restarts, 1)):
        point = task.random_point(rng)
        traj = [task.objective(point)]
        for _ in range(max_alternations):
            point = task.sweep(point, cfg)
            traj.append(task.objective(point))
            if traj[-1] - traj[-2] <= rel_tol * max(1.0, abs(traj[-2])):
                break
        restart_values.append(traj[-1])
        if best is None or traj[-1] > best.value:
            best = SeesawOutcome(value=traj[-1], point=point, trajectory=traj)
    best.restart_values = restart_values
    return best


def chsh_seesaw(restarts: int = 20, seed: int = 0, cfg=None):
    from .npa import chsh_functional

    return seesaw(BellSeesawTask(bell=chsh_functional()), restarts=restarts, seed=seed, cfg=cfg)


def qrac_seesaw(n_bits: int = 2, d: int = 2, restarts: int = 20, seed: int = 0, cfg=None):
    from .npa import qrac_witness

    task = PamSeesawTask(witness=qrac_witness(n_bits), dim=d, n_preparations=2**n_bits, n_meas=n_bits)
    return seesaw(task, restarts=restarts, seed=seed, cfg=cfg)
