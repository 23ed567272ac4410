"""
Decorators for registering solver methods on the study facade.
"""
import logging
import time
from dataclasses import replace
from functools import wraps
from typing import Callable, Dict

from .exceptions import AllInfeasibleError, InfeasibleScenarioError, LnaEeError

logger = logging.getLogger(__name__)

# Solver name -> facade method name, in registration order
SOLVER_REGISTRY: Dict[str, str] = {}


def solver_method(name: str):
    """
    Register a facade method as the named solver.

    The wrapped method returns a SolverOutcome with its wall time filled in.
    Domain errors do not propagate: infeasibility becomes an ``infeasible``
    outcome and any other LnaEeError an ``error`` outcome carrying the message.

    Args:
        name: Solver name as used on the command line and in result files

    Usage:
        class EEStudy:
            @solver_method('bgaip')
            def bgaip(self) -> SolverOutcome:
                ...
    """
    def decorator(method: Callable) -> Callable:
        if name in SOLVER_REGISTRY and SOLVER_REGISTRY[name] != method.__name__:
            raise ValueError(f"solver name '{name}' is already registered")
        SOLVER_REGISTRY[name] = method.__name__

        @wraps(method)
        def wrapper(self, *args, **kwargs):
            from .facade import SolverOutcome

            start = time.perf_counter()
            try:
                outcome = method(self, *args, **kwargs)
            except (InfeasibleScenarioError, AllInfeasibleError) as e:
                logger.warning(f"Solver '{name}' found no feasible point: {e}")
                outcome = SolverOutcome.failed(name, "infeasible", str(e))
            except LnaEeError as e:
                logger.error(f"Solver '{name}' failed: {e}")
                outcome = SolverOutcome.failed(name, "error", str(e))
            wall_ms = (time.perf_counter() - start) * 1e3
            return replace(outcome, wall_ms=wall_ms)

        wrapper.solver_name = name
        return wrapper
    return decorator


def registered_solvers() -> tuple:
    """Names of all registered solvers."""
    return tuple(SOLVER_REGISTRY)
