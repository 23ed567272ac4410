"""
Simplified facade for running every solver on one channel realization.

This module gives the harness and interactive users a single object per
realization whose methods run the solvers by name and return uniform
outcomes.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .bgaip import bgaip_solve, separate_lna_solve
from .config import ScenarioConfig, SolverParams
from .decorators import SOLVER_REGISTRY, solver_method
from .exceptions import ConfigError
from .metrics import LnaSetting, PowerAllocation, evaluate_separate, evaluate_shared
from .oracles import (
    OracleResult,
    brute_force,
    heuristic_max_gain,
    heuristic_max_power,
    hybrid1,
    hybrid2,
)
from .scenario import MAX_RESAMPLES, ChannelRealization, draw_realization
from .utils import make_stream

logger = logging.getLogger(__name__)

# Extra stream key appended to the realization keys, one per solver
SOLVER_STREAM_KEYS = {
    "bgaip": 101,
    "brute_force": 102,
    "hybrid1": 103,
    "hybrid2": 104,
    "heuristic_max_gain": 105,
    "heuristic_max_power": 106,
    "separate_lna": 107,
}


@dataclass(frozen=True)
class SolverOutcome:
    """
    Uniform result of one solver on one realization.

    Attributes:
        solver: Solver name
        status: ``ok``, ``infeasible`` or ``error``
        u: Energy efficiency in bits/s/Hz per watt (0 unless ok)
        omega_db: Shared gain in dB, None for the separate receiver
        gains_db: Per-antenna gains in dB for the separate receiver
        setting: LNA setting the powers were optimized for, None on failure
        p: Transmit powers in watts
        r_sum: Sum spectral efficiency
        p_sum: Amplifier-adjusted transmit power sum(p) / eta
        gaip_invocations: Number of GAIP runs
        trace: (gain dB, U) pairs when requested
        wall_ms: Wall time of the solver
        error: Error message for failed outcomes
    """

    solver: str
    status: str = "ok"
    u: float = 0.0
    omega_db: Optional[int] = None
    gains_db: Tuple[int, ...] = ()
    p: Tuple[float, ...] = ()
    r_sum: float = 0.0
    p_sum: float = 0.0
    gaip_invocations: int = 0
    setting: Optional[LnaSetting] = None
    trace: Optional[List[Tuple[int, float]]] = field(default=None, compare=False)
    wall_ms: float = field(default=0.0, compare=False)
    error: str = ""

    @classmethod
    def failed(cls, solver: str, status: str, message: str) -> "SolverOutcome":
        return cls(solver=solver, status=status, error=message)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class EEStudy:
    """
    Facade over one channel realization and the solvers that can run on it.

    Each solver draws its random numbers from its own stream derived from the
    study seed, the realization keys and a per-solver key, so results do not
    depend on which other solvers run or in which order.

    Usage:
        study = get_study(ScenarioConfig.defaults(), 7, 0, 3)
        outcome = study.bgaip()
        print(outcome.u, outcome.omega_db)

        # or by name
        outcome = study.run('brute_force')
    """

    def __init__(
        self,
        channel: ChannelRealization,
        params: Optional[SolverParams] = None,
        seed: int = 0,
        keys: Tuple[int, ...] = (),
        trace_omega: bool = False,
        resampled: int = 0,
    ):
        """
        Initialize the study.

        Args:
            channel: Channel realization shared by every solver
            params: GAIP parameters
            seed: Master seed
            keys: Stream keys identifying the realization
            trace_omega: Keep per-gain traces in the outcomes
            resampled: Number of singular draws discarded for this realization
        """
        self.channel = channel
        self.config: ScenarioConfig = channel.config
        self.params = params or SolverParams()
        self.seed = int(seed)
        self.keys = tuple(int(k) for k in keys)
        self.trace_omega = trace_omega
        self.resampled = resampled

    def stream(self, solver: str) -> np.random.Generator:
        """Random stream reserved for one solver on this realization."""
        return make_stream(self.seed, *self.keys, SOLVER_STREAM_KEYS[solver])

    def run(self, solver: str) -> SolverOutcome:
        """
        Run a solver by name.

        Raises:
            ConfigError: If the solver name is unknown
        """
        if solver not in SOLVER_REGISTRY:
            raise ConfigError(f"Unknown solver '{solver}'; choose from {', '.join(SOLVER_REGISTRY)}")
        return getattr(self, SOLVER_REGISTRY[solver])()

    def _shared_outcome(self, name: str, p: PowerAllocation, gain_db: int, u: float,
                        invocations: int = 0, trace=None) -> SolverOutcome:
        setting = LnaSetting.shared(gain_db)
        ev = evaluate_shared(p, setting.linear, self.channel, self.config)
        return SolverOutcome(
            solver=name,
            u=float(u),
            omega_db=setting.shared_db,
            p=tuple(float(x) for x in p.p),
            r_sum=ev.r_sum,
            p_sum=ev.p_sum,
            gaip_invocations=invocations,
            setting=setting,
            trace=trace if self.trace_omega else None,
        )

    def _oracle_outcome(self, name: str, result: OracleResult) -> SolverOutcome:
        if result.p is None:
            return SolverOutcome.failed(name, result.status, "no feasible point")
        return self._shared_outcome(name, result.p, result.omega_db, result.u,
                                    result.gaip_invocations, result.trace)

    @solver_method("bgaip")
    def bgaip(self) -> SolverOutcome:
        """Bisection over the shared gain with GAIP for the powers."""
        result = bgaip_solve(self.channel, self.config, self.params, self.stream("bgaip"),
                             trace=self.trace_omega)
        return self._shared_outcome("bgaip", result.p_opt, result.omega_opt_db, result.u_max,
                                    result.gaip_invocations, result.per_omega_trace)

    @solver_method("brute_force")
    def brute_force(self) -> SolverOutcome:
        """Exhaustive search at 0.1 dB power and 1 dB gain resolution."""
        return self._oracle_outcome("brute_force", brute_force(self.channel, self.config))

    @solver_method("hybrid1")
    def hybrid1(self) -> SolverOutcome:
        """GAIP at every gain."""
        return self._oracle_outcome(
            "hybrid1", hybrid1(self.channel, self.config, self.params, self.stream("hybrid1"))
        )

    @solver_method("hybrid2")
    def hybrid2(self) -> SolverOutcome:
        """Power grid with a gain bisection per grid point."""
        return self._oracle_outcome("hybrid2", hybrid2(self.channel, self.config))

    @solver_method("heuristic_max_gain")
    def heuristic_max_gain(self) -> SolverOutcome:
        """Maximum gain with optimized powers."""
        return self._oracle_outcome(
            "heuristic_max_gain",
            heuristic_max_gain(self.channel, self.config, self.params, self.stream("heuristic_max_gain")),
        )

    @solver_method("heuristic_max_power")
    def heuristic_max_power(self) -> SolverOutcome:
        """Maximum powers with the best gain."""
        return self._oracle_outcome("heuristic_max_power", heuristic_max_power(self.channel, self.config))

    @solver_method("separate_lna")
    def separate_lna(self) -> SolverOutcome:
        """One LNA per antenna, every gain vector enumerated."""
        result = separate_lna_solve(self.channel, self.config, self.params, self.stream("separate_lna"))
        setting = LnaSetting.separate(result.gains_db)
        ev = evaluate_separate(result.p, setting.linear, self.channel, self.config)
        return SolverOutcome(
            solver="separate_lna",
            u=result.u,
            gains_db=result.gains_db,
            p=tuple(float(x) for x in result.p.p),
            r_sum=ev.r_sum,
            p_sum=ev.p_sum,
            gaip_invocations=result.gaip_runs,
            setting=setting,
        )


def get_study(
    config: ScenarioConfig,
    seed: Optional[int] = None,
    *indices: int,
    params: Optional[SolverParams] = None,
    trace_omega: bool = False,
    max_resamples: int = MAX_RESAMPLES,
) -> EEStudy:
    """
    Draw a realization and wrap it in a study.

    This is a convenience function that makes it easier to get a facade for
    the realization identified by ``(seed, *indices)``.

    Args:
        config: Scenario configuration
        seed: Master seed (defaults to ``config.rng_seed``)
        *indices: Stream keys, typically (sweep point, realization)
        params: GAIP parameters
        trace_omega: Keep per-gain traces
        max_resamples: Retries on singular channels

    Returns:
        EEStudy instance

    Raises:
        SingularChannelError: If no usable channel was drawn
    """
    seed = config.rng_seed if seed is None else seed
    channel, resampled = draw_realization(config, make_stream(seed, *indices), max_resamples)
    return EEStudy(channel, params=params, seed=seed, keys=indices,
                   trace_omega=trace_omega, resampled=resampled)
