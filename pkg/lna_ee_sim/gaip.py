"""
Gradient assisted interior point (GAIP) solver for the transmit powers.

For a fixed LNA setting every constraint is linear in the power vector p:

    0 <= p_k <= P_max
    T_k p_k <= Gamma_max
    a_m . p + b_m <= P_max^ADC     (a_mk = Omega_m |g_mk|^2, b_m = Omega_m sigma_N^2)

so the shared and the separate LNA receivers differ only in T, a and b. The
solver maximizes U(p) + xi * B(p), B being the sum of the logarithms of all
constraint margins, with normalized gradient ascent and a geometrically
decaying penalty factor xi. Each penalty level is centered before xi decays:
passes of ``inner_steps`` steps repeat, warm-started, until one no longer
raises the penalized value. Problems are handled in batches along a leading
axis so gain sweeps run vectorized; a single solve is a batch of one.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from .config import ScenarioConfig, SolverParams
from .exceptions import BoundaryPointError, InfeasibleScenarioError
from .metrics import LN2, PowerAllocation, PowerLike, as_power, snr_gain_shared
from .scenario import ChannelRealization

logger = logging.getLogger(__name__)

# Fraction of each constraint scale kept free by the initial point
INITIAL_MARGIN = 0.01
MIN_INITIAL_POWER = 1e-12
# xi0 * |B(p0)| relative to U(p0) when xi0 is not given
INITIAL_BARRIER_WEIGHT = 1.0


@dataclass(frozen=True)
class PowerProblem:
    """
    A batch of power-allocation problems with linear constraints.

    Attributes:
        snr_gain: (B, K) SNR per watt T_k
        adc_gain: (B, M, K) ADC input power per watt, Omega_m |g_mk|^2
        adc_floor: (B, M) ADC input power at zero transmit power, Omega_m sigma_N^2
        config: Scenario configuration providing the scalar limits
    """

    snr_gain: np.ndarray
    adc_gain: np.ndarray
    adc_floor: np.ndarray
    config: ScenarioConfig

    @property
    def batch(self) -> int:
        return self.snr_gain.shape[0]

    @property
    def num_constraints(self) -> int:
        """Inequality constraints per problem, 3K + M."""
        return 3 * self.snr_gain.shape[1] + self.adc_floor.shape[1]

    @property
    def has_interior(self) -> np.ndarray:
        """(B,) True where p -> 0 keeps every ADC strictly below saturation."""
        return np.all(self.adc_floor < self.config.max_adc_input, axis=1)

    def take(self, rows: np.ndarray) -> "PowerProblem":
        return PowerProblem(self.snr_gain[rows], self.adc_gain[rows],
                            self.adc_floor[rows], self.config)


@dataclass(frozen=True)
class PenaltyState:
    """Value of the penalized objective at one point."""

    phi: float
    barrier: float
    objective: float
    t_k: np.ndarray


@dataclass(frozen=True)
class GaipResult:
    """
    Outcome of one GAIP run.

    ``phi_history`` is filled only when tracing was requested and holds, per
    outer iteration, the sequence of accepted penalized values.
    """

    p: PowerAllocation
    u: float
    outer_iterations: int
    converged: bool
    omega: Union[float, np.ndarray, None] = None
    phi_history: Tuple[Tuple[float, ...], ...] = ()


def shared_problem(
    omega: "float | np.ndarray",
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
) -> PowerProblem:
    """Problem batch for one or several shared linear gains."""
    config = config or ch.config
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    snr_gain = snr_gain_shared(om, ch)
    adc_gain = om[:, None, None] * ch.gain_sq[None, :, :]
    adc_floor = np.repeat(om[:, None] * config.noise_power, config.num_antennas, axis=1)
    return PowerProblem(snr_gain, adc_gain, adc_floor, config)


def separate_problem(
    omega_vecs: np.ndarray,
    snr_gain: np.ndarray,
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
) -> PowerProblem:
    """Problem batch for per-antenna linear gains (B, M) with precomputed SNR gains (B, K)."""
    config = config or ch.config
    om = np.atleast_2d(np.asarray(omega_vecs, dtype=float))
    adc_gain = om[:, :, None] * ch.gain_sq[None, :, :]
    adc_floor = om * config.noise_power
    return PowerProblem(np.atleast_2d(snr_gain), adc_gain, adc_floor, config)


def _margins(problem: PowerProblem, p: np.ndarray):
    cfg = problem.config
    adc = cfg.max_adc_input - problem.adc_floor - np.einsum("bmk,bk->bm", problem.adc_gain, p)
    return p, cfg.max_tx_power - p, cfg.max_snr - problem.snr_gain * p, adc


def _objective(problem: PowerProblem, p: np.ndarray) -> np.ndarray:
    # inside the feasible set Gamma_k <= Gamma_max, so the uncapped rate is exact
    cfg = problem.config
    rates = np.log2(1.0 + cfg.diversity_gain * problem.snr_gain * p)
    return np.sum(rates, axis=1) / (cfg.circuit_power + np.sum(p, axis=1) / cfg.pa_efficiency)


def _barrier(problem: PowerProblem, p: np.ndarray) -> np.ndarray:
    total = np.zeros(p.shape[0])
    interior = np.ones(p.shape[0], dtype=bool)
    for margin in _margins(problem, p):
        positive = margin > 0
        interior &= np.all(positive, axis=1)
        total += np.sum(np.log(np.where(positive, margin, 1.0)), axis=1)
    return np.where(interior, total, -np.inf)


def _penalty(problem: PowerProblem, p: np.ndarray, xi: np.ndarray) -> np.ndarray:
    barrier = _barrier(problem, p)
    with np.errstate(invalid="ignore"):
        phi = _objective(problem, p) + xi * barrier
    return np.where(np.isfinite(barrier), phi, -np.inf)


def _gradient(problem: PowerProblem, p: np.ndarray, xi: np.ndarray) -> np.ndarray:
    cfg = problem.config
    t = problem.snr_gain
    snr = t * p
    denom = cfg.circuit_power + np.sum(p, axis=1, keepdims=True) / cfg.pa_efficiency
    r_sum = np.sum(np.log2(1.0 + cfg.diversity_gain * snr), axis=1, keepdims=True)
    d_objective = (cfg.diversity_gain * t / (LN2 * (1.0 + cfg.diversity_gain * snr) * denom)
                   - r_sum / (cfg.pa_efficiency * denom ** 2))

    _, tx_upper, snr_margin, adc_margin = _margins(problem, p)
    d_barrier = (1.0 / p - 1.0 / tx_upper - t / snr_margin
                 - np.einsum("bmk,bm->bk", problem.adc_gain, 1.0 / adc_margin))
    return d_objective + xi[:, None] * d_barrier


def _initial_points(problem: PowerProblem, stream: np.random.Generator) -> np.ndarray:
    """Uniform draw on (0, P_max)^K scaled back until every margin is comfortable."""
    cfg = problem.config
    p = stream.uniform(0.0, cfg.max_tx_power, size=problem.snr_gain.shape)
    p = np.maximum(p, MIN_INITIAL_POWER)

    limits = [(1.0 - INITIAL_MARGIN) * cfg.max_tx_power / p,
              (1.0 - INITIAL_MARGIN) * cfg.max_snr / (problem.snr_gain * p)]
    headroom = cfg.max_adc_input - problem.adc_floor
    # keep 1% of the ADC range free, or half of what is left when that is less
    adc_room = headroom - np.minimum(INITIAL_MARGIN * cfg.max_adc_input, 0.5 * headroom)
    load = np.einsum("bmk,bk->bm", problem.adc_gain, p)
    with np.errstate(divide="ignore"):
        limits.append(np.where(load > 0, adc_room / load, np.inf))

    scale = np.ones(problem.batch)
    for lim in limits:
        scale = np.minimum(scale, np.min(lim, axis=1))
    return np.maximum(p * np.maximum(scale, 0.0)[:, None], MIN_INITIAL_POWER)


def _default_xi0(problem: PowerProblem, p0: np.ndarray) -> np.ndarray:
    barrier = np.abs(_barrier(problem, p0))
    return INITIAL_BARRIER_WEIGHT * _objective(problem, p0) / np.maximum(barrier, 1.0)


def gaip_batch(
    problem: PowerProblem,
    params: Optional[SolverParams] = None,
    stream: Optional[np.random.Generator] = None,
    initial: Optional[np.ndarray] = None,
    trace: bool = False,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, List[List[List[float]]]]:
    """
    Run GAIP on every problem of a batch.

    Rows without a strict interior are skipped and reported with U = -inf.

    Args:
        problem: Problem batch
        params: Solver parameters
        stream: Random stream for the initial points
        initial: Optional (B, K) strictly feasible starting points
        trace: Record accepted penalized values per outer iteration

    Returns:
        Tuple of (p (B, K), U (B,), outer iterations (B,), converged (B,),
        per-row phi histories)
    """
    params = params or SolverParams()
    cfg = problem.config
    n = problem.batch
    feasible = problem.has_interior

    if initial is not None:
        p = np.array(initial, dtype=float, copy=True)
    else:
        stream = stream if stream is not None else np.random.default_rng()
        p = _initial_points(problem, stream)
    p[~feasible] = np.nan

    xi = np.full(n, np.nan)
    rows0 = np.flatnonzero(feasible)
    if params.xi0 is not None:
        xi[rows0] = params.xi0
    elif rows0.size:
        xi[rows0] = _default_xi0(problem.take(rows0), p[rows0])

    best_p = p.copy()
    best_u = np.full(n, -np.inf)
    phi_prev = np.full(n, np.nan)
    if rows0.size:
        sub = problem.take(rows0)
        best_u[rows0] = _objective(sub, p[rows0])
        phi_prev[rows0] = _penalty(sub, p[rows0], xi[rows0])

    outer = np.zeros(n, dtype=int)
    passes = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    active = feasible.copy()
    histories: List[List[List[float]]] = [[] for _ in range(n)]
    num_constraints = problem.num_constraints

    while np.any(active):
        rows = np.flatnonzero(active)
        sub = problem.take(rows)
        xi_rows = xi[rows]
        curr = p[rows]
        phi_opt = _penalty(sub, curr, xi_rows)
        phi_start = phi_opt.copy()
        if trace:
            for r, v in zip(rows, phi_opt):
                if passes[r] == 0:
                    histories[r].append([float(v)])

        for step in range(1, params.inner_steps + 1):
            t_l = params.step0 / step
            grad = _gradient(sub, curr, xi_rows) * cfg.max_tx_power
            norm = np.linalg.norm(grad, axis=1)
            movable = np.isfinite(norm) & (norm > 0)
            direction = np.where(movable[:, None], grad / np.where(movable, norm, 1.0)[:, None], 0.0)
            proposal = curr + t_l * cfg.max_tx_power * direction
            phi_next = _penalty(sub, proposal, xi_rows)
            accept = movable & (phi_next > phi_opt)
            if np.any(accept):
                curr[accept] = proposal[accept]
                phi_opt[accept] = phi_next[accept]
                if trace:
                    for idx in np.flatnonzero(accept):
                        histories[rows[idx]][-1].append(float(phi_opt[idx]))

        p[rows] = curr
        passes[rows] += 1
        u_rows = _objective(sub, curr)
        improved = u_rows > best_u[rows]
        best_u[rows[improved]] = u_rows[improved]
        best_p[rows[improved]] = curr[improved]

        # a level is centered once a whole pass no longer raises phi
        scale = np.abs(u_rows)
        settled = phi_opt - phi_start <= params.stop_tolerance * scale
        level_end = settled | (passes[rows] >= params.max_passes)
        if not np.any(level_end):
            continue

        ends = rows[level_end]
        outer[ends] += 1
        passes[ends] = 0
        xi_centered = xi_rows[level_end]
        xi[ends] = xi_centered * params.penalty_decay
        phi_new = _penalty(sub.take(np.flatnonzero(level_end)), curr[level_end], xi[ends])
        with np.errstate(divide="ignore", invalid="ignore"):
            change = np.abs((phi_new - phi_prev[ends]) / phi_prev[ends])
        phi_prev[ends] = phi_new

        # xi * (3K + M) bounds the distance of a centered point from the optimum
        gap_closed = xi_centered * num_constraints <= params.stop_tolerance * scale[level_end]
        # the first outer iteration has no predecessor to compare against
        done = (outer[ends] >= 2) & settled[level_end] & (change <= params.stop_tolerance) & gap_closed
        underflow = ~done & (xi[ends] < params.xi_floor)
        converged[ends[done]] = True
        if np.any(underflow):
            logger.warning(
                f"GAIP penalty factor fell below {params.xi_floor:g} before the barrier gap "
                f"closed to {params.stop_tolerance:g} on {int(np.sum(underflow))} problem(s); "
                f"returning best point found"
            )
        active[ends[done | underflow]] = False
        logger.debug(
            f"GAIP penalty level closed on {ends.size} of {rows.size} active problem(s), "
            f"{int(np.sum(done))} converged"
        )

    return best_p, best_u, outer, converged, histories


def penalty_state(
    p: PowerLike,
    xi: float,
    omega: float,
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
) -> PenaltyState:
    """Objective, barrier and penalized value at p for a shared gain."""
    problem = shared_problem(omega, ch, config)
    pv = as_power(p)[None, :]
    barrier = float(_barrier(problem, pv)[0])
    objective = float(_objective(problem, pv)[0])
    phi = objective + xi * barrier if np.isfinite(barrier) else -np.inf
    return PenaltyState(phi=phi, barrier=barrier, objective=objective, t_k=problem.snr_gain[0])


def penalty_value(
    p: PowerLike,
    xi: float,
    omega: float,
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
) -> float:
    """
    Penalized objective U(p) + xi B(p).

    Returns ``-inf`` if p is on or outside the boundary of the feasible set.
    """
    return penalty_state(p, xi, omega, ch, config).phi


def penalty_gradient(
    p: PowerLike,
    xi: float,
    omega: float,
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
) -> np.ndarray:
    """
    Analytic gradient of the penalized objective with respect to p (watts).

    Raises:
        BoundaryPointError: If p is not strictly interior
    """
    problem = shared_problem(omega, ch, config)
    pv = as_power(p)[None, :]
    if not np.isfinite(_barrier(problem, pv)[0]):
        raise BoundaryPointError(f"gradient requested at non-interior point {pv[0]}")
    return _gradient(problem, pv, np.array([float(xi)]))[0]


def ascent_step(
    p: PowerLike,
    xi: float,
    omega: float,
    step: float,
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
) -> np.ndarray:
    """
    One normalized-gradient proposal p + step * P_max * g / ||g||.

    The step length measured in units of P_max is exactly ``step``.
    """
    config = config or ch.config
    grad = penalty_gradient(p, xi, omega, ch, config) * config.max_tx_power
    return as_power(p) + step * config.max_tx_power * grad / np.linalg.norm(grad)


def initial_feasible_point(
    omega: float,
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
    stream: Optional[np.random.Generator] = None,
) -> PowerAllocation:
    """
    Random strictly feasible starting point for a shared gain.

    Raises:
        InfeasibleScenarioError: If Omega sigma_N^2 already saturates the ADC
    """
    problem = shared_problem(omega, ch, config)
    if not problem.has_interior[0]:
        raise InfeasibleScenarioError(
            f"gain {omega:.6g} saturates the ADC with noise alone; no interior point exists"
        )
    stream = stream if stream is not None else np.random.default_rng()
    return PowerAllocation(_initial_points(problem, stream)[0])


def solve_problem(
    problem: PowerProblem,
    params: Optional[SolverParams] = None,
    stream: Optional[np.random.Generator] = None,
    trace: bool = False,
    omega: Union[float, np.ndarray, None] = None,
) -> GaipResult:
    """
    Run GAIP on a single-row problem.

    Raises:
        InfeasibleScenarioError: If the problem has no strict interior
    """
    if not problem.has_interior[0]:
        raise InfeasibleScenarioError("LNA setting saturates the ADC with noise alone")
    p, u, outer, converged, histories = gaip_batch(problem, params, stream, trace=trace)
    return GaipResult(
        p=PowerAllocation(p[0]),
        u=float(u[0]),
        outer_iterations=int(outer[0]),
        converged=bool(converged[0]),
        omega=omega,
        phi_history=tuple(tuple(h) for h in histories[0]),
    )


def gaip_solve(
    omega: float,
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
    params: Optional[SolverParams] = None,
    stream: Optional[np.random.Generator] = None,
    trace: bool = False,
) -> GaipResult:
    """
    Maximize U(p) for a fixed shared linear gain.

    Args:
        omega: Shared linear LNA gain
        ch: Channel realization
        config: Scenario configuration (defaults to the realization's)
        params: Solver parameters
        stream: Random stream for the initial point
        trace: Record accepted penalized values

    Returns:
        GaipResult with the best strictly interior point found

    Raises:
        InfeasibleScenarioError: If this gain leaves no interior
    """
    return solve_problem(shared_problem(omega, ch, config), params, stream, trace, omega=float(omega))
