import math

import numpy as np
import pytest

from lna_ee_sim.bgaip import (
    bgaip_solve,
    bisect_gain,
    max_invocations,
    separate_lna_solve,
)
from lna_ee_sim.config import ScenarioConfig
from lna_ee_sim.exceptions import AllInfeasibleError, CombinatoricsGuardError
from lna_ee_sim.facade import get_study
from lna_ee_sim.metrics import PowerAllocation, check_constraints_separate
from lna_ee_sim.oracles import hybrid1
from lna_ee_sim.utils import db_to_linear, make_stream


class Counter:
    """Evaluation stub recording every call."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = []

    def __call__(self, gain):
        self.calls.append(gain)
        return self.fn(gain)


class TestBisectGain:
    def test_interior_peak(self):
        evaluate = Counter(lambda g: -(g - 40) ** 2)
        outcome = bisect_gain(evaluate, 1, 70)
        assert outcome.gain_db == 40
        assert outcome.value == 0
        assert len(evaluate.calls) <= 16

    def test_each_gain_evaluated_once(self):
        evaluate = Counter(lambda g: -abs(g - 23.3))
        bisect_gain(evaluate, 1, 70)
        assert len(evaluate.calls) == len(set(evaluate.calls))

    @pytest.mark.parametrize("peak", [1, 2, 17, 69, 70])
    def test_peak_positions(self, peak):
        outcome = bisect_gain(lambda g: -(g - peak) ** 2, 1, 70)
        assert outcome.gain_db == peak
        assert len(outcome.evaluated) <= max_invocations(1, 70)

    def test_infeasible_high_gains(self):
        outcome = bisect_gain(lambda g: -(g - 60) ** 2 if g <= 62 else -math.inf, 1, 70)
        assert outcome.gain_db == 60

    def test_constant_function(self):
        evaluate = Counter(lambda g: 3.5)
        outcome = bisect_gain(evaluate, 1, 70)
        assert outcome.value == 3.5
        assert 1 <= outcome.gain_db <= 70
        assert len(evaluate.calls) <= 16

    def test_everything_infeasible(self):
        outcome = bisect_gain(lambda g: -math.inf, 1, 70)
        assert outcome.value == -math.inf
        assert min(outcome.evaluated) == 1

    def test_single_gain_range(self):
        outcome = bisect_gain(lambda g: 2.0, 5, 5)
        assert outcome.gain_db == 5 and outcome.steps == 0

    def test_invocation_bound(self):
        assert max_invocations(1, 70) == 16
        assert max_invocations(3, 4) == 2


class TestBgaipSolve:
    def test_stub_inner_solver(self, defaults, realization):
        ch = realization(defaults, 0)

        def inner(gain):
            return PowerAllocation([0.01, 0.01]), -(gain - 33) ** 2 + 5.0

        result = bgaip_solve(ch, inner=inner, trace=True)
        assert result.omega_opt_db == 33
        assert result.u_max == 5.0
        assert result.gaip_invocations == len(result.per_omega_trace)
        gains = [g for g, _ in result.per_omega_trace]
        assert gains == sorted(gains)

    def test_all_infeasible(self, defaults, realization):
        ch = realization(defaults, 0)
        with pytest.raises(AllInfeasibleError):
            bgaip_solve(ch, inner=lambda gain: (None, -math.inf))

    def test_invocations_bounded(self, defaults, realization):
        for seed in range(3):
            result = bgaip_solve(realization(defaults, seed), stream=make_stream(seed))
            assert result.gaip_invocations <= 16
            assert result.per_omega_trace is None
            assert 1 <= result.omega_opt_db <= 70

    def test_close_to_linear_sweep(self, defaults, realization):
        for seed in range(3):
            ch = realization(defaults, seed)
            bisected = bgaip_solve(ch, stream=make_stream(seed, 1))
            swept = hybrid1(ch, stream=make_stream(seed, 2))
            assert bisected.u_max >= swept.u * (1 - 1e-3)

    def test_bisection_agrees_with_sweep_at_large_radius(self, defaults):
        study = get_study(defaults.replace(cell_radius_m=500.0), 11, 0, 0)
        bisected = bgaip_solve(study.channel, stream=study.stream("bgaip"))
        swept = hybrid1(study.channel, stream=study.stream("hybrid1"))
        assert bisected.u_max >= swept.u * (1 - 1e-3)
        assert abs(bisected.omega_opt_db - swept.omega_db) <= 1 or bisected.u_max >= swept.u


class TestSeparateLna:
    def test_guard(self, defaults, realization):
        with pytest.raises(CombinatoricsGuardError, match="70\\^4"):
            separate_lna_solve(realization(defaults, 0))

    def test_candidate_width_checked(self, defaults, realization):
        with pytest.raises(ValueError):
            separate_lna_solve(realization(defaults, 0), candidates=np.array([[10, 20]]))

    def test_single_antenna_matches_shared_sweep(self, realization):
        cfg = ScenarioConfig.defaults(num_ues=1, num_antennas=1)
        for seed in range(3):
            ch = realization(cfg, seed)
            separate = separate_lna_solve(ch, stream=make_stream(seed, 1))
            shared = hybrid1(ch, stream=make_stream(seed, 2))
            assert separate.combinations == 70
            assert separate.u == pytest.approx(shared.u, rel=5e-3)

    def test_equal_gains_reproduce_shared(self, defaults, realization):
        ch = realization(defaults, 4)
        candidates = np.repeat(np.arange(1, 71)[:, None], 4, axis=1)
        separate = separate_lna_solve(ch, candidates=candidates, stream=make_stream(4, 1))
        shared = hybrid1(ch, stream=make_stream(4, 2))
        assert separate.u == pytest.approx(shared.u, rel=5e-3)
        assert len(set(separate.gains_db)) == 1

    def test_result_is_feasible(self, defaults, realization):
        ch = realization(defaults, 5)
        candidates = np.array([[10, 20, 30, 40], [40, 30, 20, 10], [25, 25, 25, 25]])
        result = separate_lna_solve(ch, candidates=candidates, stream=make_stream(5))
        assert result.gains_db in {tuple(c) for c in candidates.tolist()}
        omega = db_to_linear(np.asarray(result.gains_db, dtype=float))
        assert check_constraints_separate(result.p, omega, ch, defaults).strictly_feasible
        assert result.gaip_runs == 3

    def test_all_candidates_infeasible(self, defaults, realization):
        ch = realization(defaults, 0)
        # sigma_N^2 Omega exceeds the ADC limit on the first antenna
        with pytest.raises(AllInfeasibleError):
            separate_lna_solve(ch, config=defaults.replace(lna_max_db=90),
                               candidates=np.array([[90, 10, 10, 10]]), stream=make_stream(0))

    @pytest.mark.slow
    def test_never_worse_than_shared(self):
        cfg = ScenarioConfig.defaults(num_ues=2, num_antennas=2)
        from lna_ee_sim.scenario import draw_realization
        for seed in range(3):
            ch, _ = draw_realization(cfg, make_stream(seed))
            separate = separate_lna_solve(ch, stream=make_stream(seed, 1))
            shared = hybrid1(ch, stream=make_stream(seed, 2))
            assert separate.combinations == 4900
            assert separate.u >= shared.u * (1 - 5e-3)
