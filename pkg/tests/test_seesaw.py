import numpy as np
import pytest

from qsdp.quantum import qsd_optimal, random_pure
from qsdp.seesaw import PamSeesawTask, chsh_seesaw, qrac_seesaw, seesaw

ROOT2 = np.sqrt(2.0)


class TestSeesawChsh:
    def test_reaches_tsirelson(self):
        out = chsh_seesaw(restarts=4, seed=0)
        assert out.value >= 2 * ROOT2 - 1e-3
        assert out.value <= 2 * ROOT2 + 1e-6  # never exceeds the quantum bound

    def test_trajectory_monotone(self):
        out = chsh_seesaw(restarts=2, seed=1)
        traj = out.trajectory
        assert all(b >= a - 1e-6 for a, b in zip(traj, traj[1:]))

    def test_point_is_physical(self):
        out = chsh_seesaw(restarts=2, seed=2)
        rho = out.point["state"]
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-6)
        assert np.linalg.eigvalsh(rho)[0] > -1e-7
        for side in ("A", "B"):
            for m in out.point[side]:
                w = np.linalg.eigvalsh(m)
                assert w[0] > -1e-7 and w[-1] < 1 + 1e-7


class TestSeesawQrac:
    def test_reaches_analytic_optimum(self):
        out = qrac_seesaw(restarts=4, seed=0)
        target = (1 + 1 / ROOT2) / 2
        assert out.value >= target - 1e-3
        assert out.value <= target + 1e-6

    def test_deterministic_under_seed(self):
        v1 = qrac_seesaw(restarts=2, seed=7).value
        v2 = qrac_seesaw(restarts=2, seed=7).value
        assert v1 == v2


class TestSeesawQsdStep:
    def test_fixed_states_first_step_matches_qsd(self):
        rng = np.random.default_rng(3)
        r1, r2 = random_pure(rng, 2), random_pure(rng, 2)
        value, _, _ = qsd_optimal([r1, r2])
        # discrimination witness: outcome 0 of the single setting bets on state
        # 0, outcome 1 on state 1, with equal priors
        task = PamSeesawTask(
            witness={(0, 0, 0): 0.5, (1, 1, 0): 0.5},
            dim=2,
            n_preparations=2,
            n_meas=1,
            fixed_states=[r1.matrix, r2.matrix],
        )
        out = seesaw(task, restarts=1, seed=0, max_alternations=1)
        assert out.value == pytest.approx(value, abs=1e-6)

    def test_restart_values_recorded(self):
        out = qrac_seesaw(restarts=3, seed=5)
        assert len(out.restart_values) == 3
        assert max(out.restart_values) == pytest.approx(out.value)
