import math

import numpy as np
import pytest

from lna_ee_sim.bgaip import bgaip_solve
from lna_ee_sim.config import ScenarioConfig
from lna_ee_sim.exceptions import CombinatoricsGuardError
from lna_ee_sim.metrics import check_constraints_shared
from lna_ee_sim.oracles import (
    brute_force,
    gain_grid,
    heuristic_max_gain,
    heuristic_max_power,
    hybrid1,
    hybrid2,
    power_grid,
    shared_values,
)
from lna_ee_sim.utils import db_to_linear, make_stream


@pytest.fixture
def one_ue():
    return ScenarioConfig.defaults(num_ues=1, num_antennas=4)


def _is_feasible(result, ch, config):
    return check_constraints_shared(result.p, db_to_linear(result.omega_db), ch, config).feasible


class TestGrids:
    def test_power_grid_levels(self, defaults):
        grid = power_grid(defaults)
        assert grid.size == 502
        assert grid[0] == 0.0
        assert grid[1] == pytest.approx(1e-6)
        assert grid[-1] == pytest.approx(defaults.max_tx_power)
        assert np.all(np.diff(grid) > 0)

    def test_coarse_power_grid(self, defaults):
        grid = power_grid(defaults, step_db=1.0)
        assert grid.size == 52
        np.testing.assert_allclose(grid[1:11], 1e-6 * 10 ** (np.arange(10) / 10))

    def test_power_grid_step_checked(self, defaults):
        with pytest.raises(ValueError):
            power_grid(defaults, step_db=0.0)

    def test_gain_grid(self, defaults):
        np.testing.assert_array_equal(gain_grid(defaults), np.arange(1, 71))
        np.testing.assert_array_equal(gain_grid(defaults, 10), np.arange(1, 71, 10))

    def test_shared_values_mark_infeasible_rows(self, defaults, realization):
        ch = realization(defaults, 0)
        rows = np.array([[0.01, 0.02], [0.2, 0.0], [0.0, 0.0]])
        u = shared_values(rows, 10.0, ch, defaults)
        assert np.isfinite(u[0]) and u[1] == -np.inf and u[2] == 0.0


class TestBruteForce:
    def test_guard(self, realization):
        cfg = ScenarioConfig.defaults(num_ues=3, num_antennas=4)
        with pytest.raises(CombinatoricsGuardError):
            brute_force(realization(cfg, 0))

    def test_agrees_with_bgaip_for_one_ue(self, one_ue, realization):
        for seed in range(5):
            ch = realization(one_ue, seed)
            grid = brute_force(ch)
            solved = bgaip_solve(ch, stream=make_stream(seed))
            assert grid.u == pytest.approx(solved.u_max, rel=1e-2)
            assert _is_feasible(grid, ch, one_ue)

    def test_finer_grid_is_never_worse(self, one_ue, realization):
        for seed in range(3):
            ch = realization(one_ue, seed)
            fine = brute_force(ch, power_step_db=0.1)
            coarse = brute_force(ch, power_step_db=1.0)
            assert fine.u >= coarse.u * (1 - 1e-12)

    def test_evaluation_count(self, one_ue, realization):
        result = brute_force(realization(one_ue, 0), power_step_db=1.0)
        assert result.evaluations == 52 * 70


class TestHybrids:
    def test_hybrid1_sweeps_every_gain(self, defaults, realization):
        result = hybrid1(realization(defaults, 1), stream=make_stream(1))
        assert result.gaip_invocations == 70
        assert [g for g, _ in result.trace] == list(range(1, 71))
        assert result.u == max(u for _, u in result.trace)

    def test_hybrid1_skips_saturated_gains(self, realization):
        cfg = ScenarioConfig.defaults(noise_power=1.2e-11)
        result = hybrid1(realization(cfg, 2), stream=make_stream(2))
        values = dict(result.trace)
        assert all(values[g] == -math.inf for g in range(60, 71))
        assert all(math.isfinite(values[g]) for g in range(1, 60))
        assert result.omega_db < 60
        assert result.gaip_invocations == 70

    def test_hybrid2_matches_brute_force_for_one_ue(self, one_ue, realization):
        for seed in range(3):
            ch = realization(one_ue, seed)
            exhaustive = brute_force(ch)
            bisected = hybrid2(ch)
            assert bisected.u == pytest.approx(exhaustive.u, rel=1e-12)
            assert bisected.evaluations <= 16

    def test_hybrid2_two_ues_is_feasible(self, defaults, realization):
        ch = realization(defaults, 2)
        result = hybrid2(ch, power_step_db=1.0)
        assert result.status == "ok"
        assert _is_feasible(result, ch, defaults)


class TestHeuristics:
    def test_bounded_by_bgaip(self, defaults, realization):
        for seed in range(3):
            ch = realization(defaults, seed)
            best = bgaip_solve(ch, stream=make_stream(seed)).u_max
            gain = heuristic_max_gain(ch, stream=make_stream(seed, 1))
            power = heuristic_max_power(ch)
            assert gain.u <= best * (1 + 1e-3)
            assert power.u <= best * (1 + 1e-3)

    def test_outputs_are_feasible(self, defaults, realization):
        ch = realization(defaults, 7)
        gain = heuristic_max_gain(ch, stream=make_stream(7))
        power = heuristic_max_power(ch)
        assert gain.omega_db == 70
        assert _is_feasible(gain, ch, defaults)
        assert _is_feasible(power, ch, defaults)
        assert len(power.trace) == 70

    def test_max_gain_infeasible(self, realization):
        cfg = ScenarioConfig.defaults(lna_max_db=90)
        result = heuristic_max_gain(realization(cfg, 0), stream=make_stream(0))
        assert result.status == "infeasible"
        assert result.u == 0.0 and result.p is None

    def test_max_power_flat_without_adc_noise(self, realization):
        cfg = ScenarioConfig.defaults(adc_noise=0.0)
        ch = realization(cfg, 3)
        result = heuristic_max_power(ch)
        gains = db_to_linear(np.arange(1.0, 71.0))
        full = np.full(cfg.num_ues, cfg.max_tx_power)
        slack = gains * np.max(ch.gain_sq @ full + cfg.noise_power) <= cfg.max_adc_input
        values = np.array([u for _, u in result.trace])[slack]
        assert values.size > 0
        np.testing.assert_allclose(values, values[0], rtol=1e-12)
