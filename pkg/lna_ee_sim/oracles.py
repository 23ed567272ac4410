"""
Reference solvers and baselines for the shared LNA problem.

``brute_force`` searches a power grid jointly with every gain, ``hybrid1``
sweeps GAIP over every gain, ``hybrid2`` bisects the gain for every grid
power vector, and the two heuristics fix either the gain or the powers at
their maximum.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from .config import ScenarioConfig, SolverParams
from .exceptions import AllInfeasibleError, CombinatoricsGuardError, InfeasibleScenarioError
from .gaip import GaipResult, gaip_solve
from .metrics import PowerAllocation, snr_gain_shared
from .scenario import ChannelRealization
from .utils import db_to_linear, dbm_to_watts, watts_to_dbm

logger = logging.getLogger(__name__)

EVALUATION_GUARD = 10 ** 8
GRID_FLOOR_DBM = -30.0
CHUNK_ROWS = 1 << 18


@dataclass(frozen=True)
class OracleResult:
    """
    Outcome of a reference or baseline solver.

    ``p`` is None and ``u`` is 0 when the solver found nothing feasible.
    """

    p: Optional[PowerAllocation]
    omega_db: Optional[int]
    u: float
    status: str = "ok"
    gaip_invocations: int = 0
    evaluations: int = 0
    trace: Optional[List[Tuple[int, float]]] = None


def power_grid(
    config: ScenarioConfig,
    step_db: float = 0.1,
    floor_dbm: float = GRID_FLOOR_DBM,
) -> np.ndarray:
    """
    Per-UE power levels {0} plus floor_dbm..P_max in step_db increments, in watts.
    """
    if not step_db > 0:
        raise ValueError(f"power grid step must be positive (got {step_db})")
    top = watts_to_dbm(config.max_tx_power)
    if floor_dbm > top:
        return np.zeros(1)
    count = int(math.floor((top - floor_dbm) / step_db + 1e-9)) + 1
    levels = np.minimum(floor_dbm + step_db * np.arange(count), top)
    return np.concatenate(([0.0], dbm_to_watts(levels)))


def gain_grid(config: ScenarioConfig, step_db: int = 1) -> np.ndarray:
    """Integer gains from lna_min_db to lna_max_db in step_db increments."""
    if step_db < 1:
        raise ValueError(f"gain grid step must be a positive integer (got {step_db})")
    return np.arange(int(config.lna_min_db), int(config.lna_max_db) + 1, int(step_db))


def shared_values(
    p: np.ndarray,
    omega: Union[float, np.ndarray],
    ch: ChannelRealization,
    config: ScenarioConfig,
) -> np.ndarray:
    """
    Energy efficiency of power rows (N, K) under a shared gain, -inf where infeasible.

    ``omega`` is a scalar or one linear gain per row.
    """
    om = np.asarray(omega, dtype=float)
    snr = snr_gain_shared(om, ch) * p
    adc = om[..., None] * (p @ ch.gain_sq.T + config.noise_power)
    feasible = (np.all(snr <= config.max_snr, axis=1)
                & np.all(adc <= config.max_adc_input, axis=1)
                & np.all(p <= config.max_tx_power, axis=1))
    rates = np.log2(1.0 + config.diversity_gain * np.minimum(snr, config.max_snr))
    u = np.sum(rates, axis=1) / (config.circuit_power + np.sum(p, axis=1) / config.pa_efficiency)
    return np.where(feasible, u, -np.inf)


def _grid_rows(grid: np.ndarray, num_ues: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop)
    digits = np.unravel_index(idx, (grid.size,) * num_ues)
    return grid[np.stack(digits, axis=1)]


def brute_force(
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
    power_step_db: float = 0.1,
    gain_step_db: int = 1,
    floor_dbm: float = GRID_FLOOR_DBM,
    guard: int = EVALUATION_GUARD,
) -> OracleResult:
    """
    Exhaustive search over a per-UE power grid and the shared gain grid.

    Combinations are visited gain by gain in ascending order, powers in
    lexicographic order; the first maximizer wins.

    Raises:
        CombinatoricsGuardError: If the grid holds more than ``guard`` evaluations
    """
    config = config or ch.config
    grid = power_grid(config, power_step_db, floor_dbm)
    gains = gain_grid(config, gain_step_db)
    combos = grid.size ** config.num_ues
    total = combos * gains.size
    if total > guard:
        raise CombinatoricsGuardError(
            f"brute force needs {grid.size}^{config.num_ues} x {gains.size} = {total} "
            f"evaluations, above the guard of {guard}"
        )

    best_u, best_p, best_gain = -np.inf, None, None
    for gain in gains:
        omega = db_to_linear(float(gain))
        for start in range(0, combos, CHUNK_ROWS):
            rows = _grid_rows(grid, config.num_ues, start, min(start + CHUNK_ROWS, combos))
            u = shared_values(rows, omega, ch, config)
            j = int(np.argmax(u))
            if u[j] > best_u:
                best_u, best_p, best_gain = float(u[j]), rows[j], int(gain)

    logger.debug(f"Brute force: {total} evaluations, best {best_gain} dB, U={best_u:.6g}")
    if best_p is None:
        return OracleResult(p=None, omega_db=None, u=0.0, status="infeasible", evaluations=total)
    return OracleResult(p=PowerAllocation(best_p), omega_db=best_gain, u=best_u, evaluations=total)


def hybrid1(
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
    params: Optional[SolverParams] = None,
    stream: Optional[np.random.Generator] = None,
) -> OracleResult:
    """
    GAIP at every integer gain; the linear-sweep counterpart of B-GAIP.

    Each gain gets its own GAIP run, so the cost grows with the number of
    gains in the range rather than with the bisection depth.

    Raises:
        AllInfeasibleError: If no gain has a feasible interior
    """
    config = config or ch.config
    stream = stream if stream is not None else np.random.default_rng()
    best: Optional[GaipResult] = None
    best_gain = None
    trace = []
    for gain in config.gain_values_db:
        try:
            result = gaip_solve(db_to_linear(float(gain)), ch, config, params, stream)
        except InfeasibleScenarioError as e:
            logger.debug(f"Linear sweep: {e}")
            trace.append((int(gain), -math.inf))
            continue
        trace.append((int(gain), result.u))
        if best is None or result.u > best.u:
            best, best_gain = result, int(gain)

    if best is None:
        raise AllInfeasibleError("no gain in range has a feasible interior")
    return OracleResult(
        p=best.p,
        omega_db=best_gain,
        u=best.u,
        gaip_invocations=len(trace),
        trace=trace,
    )


def hybrid2(
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
    power_step_db: float = 0.1,
    floor_dbm: float = GRID_FLOOR_DBM,
    guard: int = EVALUATION_GUARD,
) -> OracleResult:
    """
    Grid search over the powers with a bisection over the gain for each point.

    All grid points are bisected together; the reported evaluation count is the
    largest number of gains evaluated for a single power vector.

    Raises:
        CombinatoricsGuardError: If the bisections exceed ``guard`` evaluations
    """
    config = config or ch.config
    grid = power_grid(config, power_step_db, floor_dbm)
    lo, hi = int(config.lna_min_db), int(config.lna_max_db)
    combos = grid.size ** config.num_ues
    depth = math.ceil(math.log2(hi - lo)) if hi - lo > 1 else 1
    if combos * 2 * depth > guard:
        raise CombinatoricsGuardError(
            f"hybrid search needs about {combos * 2 * depth} evaluations, above the guard of {guard}"
        )

    best_u, best_p, best_gain, max_evals = -np.inf, None, None, 0
    for start in range(0, combos, CHUNK_ROWS):
        rows = _grid_rows(grid, config.num_ues, start, min(start + CHUNK_ROWS, combos))
        gain, u, evals = _bisect_rows(rows, lo, hi, ch, config)
        max_evals = max(max_evals, int(np.max(evals)))
        j = int(np.argmax(u))
        if u[j] > best_u:
            best_u, best_p, best_gain = float(u[j]), rows[j], int(gain[j])

    if best_p is None:
        return OracleResult(p=None, omega_db=None, u=0.0, status="infeasible", evaluations=max_evals)
    return OracleResult(p=PowerAllocation(best_p), omega_db=best_gain, u=best_u, evaluations=max_evals)


def _bisect_rows(
    rows: np.ndarray,
    lo: int,
    hi: int,
    ch: ChannelRealization,
    config: ScenarioConfig,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = rows.shape[0]
    left = np.full(n, lo)
    right = np.full(n, hi)
    best_u = np.full(n, -np.inf)
    best_gain = np.full(n, lo)
    evals = np.zeros(n, dtype=int)

    def visit(sel: np.ndarray, gains: np.ndarray) -> np.ndarray:
        u = shared_values(rows[sel], db_to_linear(gains.astype(float)), ch, config)
        better = (u > best_u[sel]) | ((u == best_u[sel]) & (gains < best_gain[sel]))
        best_u[sel[better]] = u[better]
        best_gain[sel[better]] = gains[better]
        return u

    while np.any(left < right):
        sel = np.flatnonzero(left < right)
        mid = (left[sel] + right[sel]) / 2.0
        lb = np.floor(mid).astype(int)
        ub = np.ceil(mid).astype(int)
        ub = np.where(lb == ub, ub + 1, ub)
        over = ub > hi
        ub[over] = hi
        lb[over] = hi - 1

        u_lb = visit(sel, lb)
        u_ub = visit(sel, ub)
        evals[sel] += 2
        go_left = (u_lb > u_ub) | (np.isneginf(u_lb) & np.isneginf(u_ub))
        right[sel] = np.where(go_left, lb, right[sel])
        left[sel] = np.where(go_left, left[sel], ub)

    everything = np.arange(n)
    visit(everything, left)
    if lo == hi:
        evals += 1
    return best_gain, best_u, evals


def heuristic_max_gain(
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
    params: Optional[SolverParams] = None,
    stream: Optional[np.random.Generator] = None,
) -> OracleResult:
    """GAIP with the gain fixed at its maximum; infeasible gains report U = 0."""
    config = config or ch.config
    gain = int(config.lna_max_db)
    try:
        result = gaip_solve(db_to_linear(gain), ch, config, params, stream)
    except InfeasibleScenarioError as e:
        logger.warning(f"Maximum gain {gain} dB is infeasible: {e}")
        return OracleResult(p=None, omega_db=gain, u=0.0, status="infeasible")
    return OracleResult(p=result.p, omega_db=gain, u=result.u, gaip_invocations=1)


def heuristic_max_power(
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
) -> OracleResult:
    """
    Full transmit power on every UE, scaled down uniformly where a gain would
    violate the ADC or SNR limits, with the best gain picked by a sweep.
    """
    config = config or ch.config
    gains = config.gain_values_db
    omega = db_to_linear(gains.astype(float))
    full = np.full(config.num_ues, config.max_tx_power)

    snr_scale = np.min(config.max_snr / (snr_gain_shared(omega, ch) * config.max_tx_power), axis=1)
    load = ch.gain_sq @ full
    room = config.max_adc_input / omega[:, None] - config.noise_power
    with np.errstate(divide="ignore"):
        adc_scale = np.min(np.where(load > 0, room / load, np.inf), axis=1)
    limit = np.minimum(snr_scale, adc_scale)
    # shave an ulp-scale margin off binding limits so the point checks as feasible
    scale = np.where(limit < 1.0, limit * (1.0 - 1e-12), 1.0)
    feasible = np.all(room > 0, axis=1) & (scale > 0)

    p = np.where(feasible[:, None], scale[:, None] * full[None, :], 0.0)
    u = np.where(feasible, shared_values(p, omega, ch, config), -np.inf)
    trace = [(int(g), float(v)) for g, v in zip(gains, u)]
    if not np.any(np.isfinite(u)):
        return OracleResult(p=None, omega_db=None, u=0.0, status="infeasible", trace=trace)

    j = int(np.argmax(u))
    return OracleResult(p=PowerAllocation(p[j]), omega_db=int(gains[j]), u=float(u[j]),
                        evaluations=int(gains.size), trace=trace)
