"""
Bisection over the integer-dB shared LNA gain, and exhaustive search over
per-antenna gains for the separate LNA receiver.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import ScenarioConfig, SolverParams
from .exceptions import AllInfeasibleError, CombinatoricsGuardError, InfeasibleScenarioError
from .gaip import GaipResult, gaip_batch, gaip_solve, separate_problem
from .metrics import PowerAllocation, separate_terms
from .scenario import ChannelRealization
from .utils import db_to_linear

logger = logging.getLogger(__name__)

SEPARATE_GUARD = 10 ** 6
SEPARATE_CHUNK = 4096

# Inner solver returning (powers, U) for a gain in dB; U = -inf marks infeasible
InnerSolver = Callable[[int], Tuple[Optional[PowerAllocation], float]]


@dataclass(frozen=True)
class BisectionOutcome:
    """Best gain found by :func:`bisect_gain` and every value evaluated."""

    gain_db: int
    value: float
    evaluated: Dict[int, float]
    steps: int


@dataclass(frozen=True)
class BgaipResult:
    """
    Result of the bisection-wrapped GAIP solver.

    Attributes:
        p_opt: Optimal transmit powers
        omega_opt_db: Optimal shared gain in dB
        u_max: Energy efficiency at (p_opt, omega_opt_db)
        gaip_invocations: Number of distinct gains solved
        per_omega_trace: (gain dB, U) pairs in ascending gain, when requested
    """

    p_opt: PowerAllocation
    omega_opt_db: int
    u_max: float
    gaip_invocations: int
    per_omega_trace: Optional[List[Tuple[int, float]]] = None


@dataclass(frozen=True)
class SeparateResult:
    """Best per-antenna gain vector and its power allocation."""

    p: PowerAllocation
    gains_db: Tuple[int, ...]
    u: float
    combinations: int
    gaip_runs: int = field(default=0)


def max_invocations(lo: int, hi: int) -> int:
    """Upper bound on distinct evaluations made by :func:`bisect_gain`."""
    span = hi - lo
    return 2 * math.ceil(math.log2(span)) + 2 if span > 1 else span + 1


def bisect_gain(evaluate: Callable[[int], float], lo: int, hi: int) -> BisectionOutcome:
    """
    Integer bisection for the maximizer of a unimodal function on [lo, hi].

    Each step evaluates the two integers around the bracket midpoint and keeps
    the half holding the larger value; ties move the left edge up. When both
    values are -inf the bracket moves left, since infeasibility appears at
    high gain first. Every gain is evaluated at most once.

    Args:
        evaluate: Function of the gain in dB, returning -inf if infeasible
        lo: Smallest gain
        hi: Largest gain

    Returns:
        BisectionOutcome with the best gain seen
    """
    cache: Dict[int, float] = {}

    def value(gain: int) -> float:
        if gain in cache:
            logger.debug(f"Bisection cache hit at {gain} dB")
        else:
            cache[gain] = float(evaluate(gain))
        return cache[gain]

    left, right = int(lo), int(hi)
    steps = 0
    while left < right:
        mid = (left + right) / 2
        lb, ub = math.floor(mid), math.ceil(mid)
        if lb == ub:
            ub += 1
        if ub > hi:
            ub, lb = hi, hi - 1
        u_lb, u_ub = value(lb), value(ub)
        if u_lb > u_ub or (u_lb == -math.inf and u_ub == -math.inf):
            right = lb
        else:
            left = ub
        steps += 1
        logger.debug(f"Bisection step {steps}: U({lb})={u_lb:.6g}, U({ub})={u_ub:.6g} -> [{left}, {right}]")
    value(left)

    best = max(cache.values())
    if cache[left] == best:
        best_gain = left
    else:
        best_gain = min(g for g, v in cache.items() if v == best)
    return BisectionOutcome(gain_db=best_gain, value=best, evaluated=dict(cache), steps=steps)


def bgaip_solve(
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
    params: Optional[SolverParams] = None,
    stream: Optional[np.random.Generator] = None,
    trace: bool = False,
    inner: Optional[InnerSolver] = None,
) -> BgaipResult:
    """
    Jointly optimize the shared LNA gain and the transmit powers.

    Args:
        ch: Channel realization
        config: Scenario configuration (defaults to the realization's)
        params: GAIP parameters
        stream: Random stream for GAIP initial points
        trace: Return the (gain, U) pairs evaluated
        inner: Replacement for the per-gain GAIP solve

    Returns:
        BgaipResult

    Raises:
        AllInfeasibleError: If no evaluated gain has a feasible interior
    """
    config = config or ch.config
    solutions: Dict[int, Optional[PowerAllocation]] = {}

    def evaluate(gain_db: int) -> float:
        if inner is not None:
            p, u = inner(gain_db)
            solutions[gain_db] = p
            return u
        try:
            result: GaipResult = gaip_solve(db_to_linear(gain_db), ch, config, params, stream)
        except InfeasibleScenarioError as e:
            logger.warning(f"Gain {gain_db} dB is infeasible: {e}")
            solutions[gain_db] = None
            return -math.inf
        solutions[gain_db] = result.p
        return result.u

    outcome = bisect_gain(evaluate, config.lna_min_db, config.lna_max_db)
    if outcome.value == -math.inf or solutions.get(outcome.gain_db) is None:
        raise AllInfeasibleError(
            f"no feasible gain among {sorted(outcome.evaluated)} dB"
        )

    logger.debug(
        f"B-GAIP: optimum {outcome.gain_db} dB, U={outcome.value:.6g}, "
        f"{len(outcome.evaluated)} GAIP runs"
    )
    return BgaipResult(
        p_opt=solutions[outcome.gain_db],
        omega_opt_db=outcome.gain_db,
        u_max=outcome.value,
        gaip_invocations=len(outcome.evaluated),
        per_omega_trace=sorted(outcome.evaluated.items()) if trace else None,
    )


def _gain_vectors(config: ScenarioConfig, candidates: Optional[np.ndarray], guard: int) -> np.ndarray:
    if candidates is not None:
        vectors = np.atleast_2d(np.asarray(candidates, dtype=int))
        if vectors.shape[1] != config.num_antennas:
            raise ValueError(
                f"candidate gain vectors need {config.num_antennas} entries (got {vectors.shape[1]})"
            )
        return vectors

    count = config.num_gains ** config.num_antennas
    if count > guard:
        raise CombinatoricsGuardError(
            f"{config.num_gains}^{config.num_antennas} = {count} gain vectors exceed the guard of {guard}"
        )
    # lexicographic order, first antenna most significant
    return np.array(list(itertools.product(config.gain_values_db, repeat=config.num_antennas)), dtype=int)


def separate_lna_solve(
    ch: ChannelRealization,
    config: Optional[ScenarioConfig] = None,
    params: Optional[SolverParams] = None,
    stream: Optional[np.random.Generator] = None,
    candidates: Optional[np.ndarray] = None,
    guard: int = SEPARATE_GUARD,
) -> SeparateResult:
    """
    Exhaustive search over per-antenna integer-dB gains with GAIP for the powers.

    Gain vectors are enumerated lexicographically; among equal energy
    efficiencies the vector with the smaller total gain wins, then the first
    in enumeration order.

    Args:
        ch: Channel realization
        config: Scenario configuration (defaults to the realization's)
        params: GAIP parameters
        stream: Random stream for GAIP initial points
        candidates: Optional (N, M) array restricting the gain vectors searched
        guard: Maximum number of gain vectors to enumerate

    Returns:
        SeparateResult

    Raises:
        CombinatoricsGuardError: If the full enumeration exceeds ``guard``
        AllInfeasibleError: If no gain vector is feasible
    """
    config = config or ch.config
    stream = stream if stream is not None else np.random.default_rng()
    vectors = _gain_vectors(config, candidates, guard)

    best_u = -math.inf
    best_key: Optional[Tuple[int, int]] = None
    best_p: Optional[np.ndarray] = None
    best_vec: Optional[np.ndarray] = None
    runs = 0

    for start in range(0, vectors.shape[0], SEPARATE_CHUNK):
        chunk = vectors[start:start + SEPARATE_CHUNK]
        omega = db_to_linear(chunk.astype(float))
        _, snr_gain, usable = separate_terms(omega, ch)
        if not np.any(usable):
            continue
        rows = np.flatnonzero(usable)
        problem = separate_problem(omega[rows], snr_gain[rows], ch, config)
        p, u, _, _, _ = gaip_batch(problem, params, stream)
        runs += int(np.sum(problem.has_interior))

        for idx in np.flatnonzero(np.isfinite(u) & (u >= best_u)):
            if u[idx] < best_u:
                continue
            vec = chunk[rows[idx]]
            key = (int(np.sum(vec)), start + int(rows[idx]))
            if u[idx] > best_u or key < best_key:
                best_u, best_key = float(u[idx]), key
                best_p, best_vec = p[idx], vec

    if best_p is None or best_u == -math.inf:
        raise AllInfeasibleError("no per-antenna gain vector has a feasible interior")

    logger.debug(f"Separate LNA optimum {tuple(best_vec)} dB, U={best_u:.6g} over {vectors.shape[0]} vectors")
    return SeparateResult(
        p=PowerAllocation(best_p),
        gains_db=tuple(int(g) for g in best_vec),
        u=best_u,
        combinations=int(vectors.shape[0]),
        gaip_runs=runs,
    )
