"""
Configuration management for the LNA energy-efficiency simulator.

All values are held in linear SI units. dB and dBm quantities are converted
once, when a configuration file is loaded, so the numerical core never mixes
units.
"""
import logging
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .exceptions import ConfigError
from .utils import db_to_linear, dbm_to_watts

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

LAYOUTS = ("centralized", "distributed")


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Cell geometry, radio and power-model parameters of one scenario.

    Defaults are the reference parameter set at the
    smallest cell radius, with K=2 UEs and M=4 distributed antennas.
    """

    cell_radius_m: float = 100.0
    num_ues: int = 2
    num_antennas: int = 4
    layout: str = "distributed"
    noise_power: float = dbm_to_watts(-104.0)
    adc_noise: float = dbm_to_watts(-60.0)
    shadow_std_db: float = 8.0
    lna_min_db: int = 1
    lna_max_db: int = 70
    diversity_gain: float = 1.0
    circuit_power: float = 0.1
    pa_efficiency: float = 0.5
    max_tx_power: float = dbm_to_watts(20.0)
    max_adc_input: float = dbm_to_watts(-20.0)
    max_snr: float = db_to_linear(35.0)
    min_distance_m: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        is_valid, problems = self.validate()
        if not is_valid:
            raise ConfigError(f"Invalid scenario configuration: {'; '.join(problems)}")

    @classmethod
    def defaults(cls, **changes: Any) -> "ScenarioConfig":
        """Default scenario parameters, optionally overridden."""
        return cls(**changes)

    def validate(self) -> Tuple[bool, List[str]]:
        """
        Check every invariant of the configuration.

        Returns:
            Tuple of (is_valid, list_of_problems)
        """
        problems = []

        if self.num_ues < 1:
            problems.append(f"num_ues must be >= 1 (got {self.num_ues})")
        if self.num_antennas < self.num_ues:
            problems.append(
                f"num_antennas must be >= num_ues for zero-forcing "
                f"(got M={self.num_antennas}, K={self.num_ues})"
            )
        if self.layout not in LAYOUTS:
            problems.append(f"layout must be one of {LAYOUTS} (got {self.layout!r})")
        if int(self.lna_min_db) != self.lna_min_db or int(self.lna_max_db) != self.lna_max_db:
            problems.append("lna_min_db and lna_max_db must be integers")
        elif self.lna_min_db > self.lna_max_db:
            problems.append(
                f"lna_min_db must not exceed lna_max_db "
                f"(got {self.lna_min_db} > {self.lna_max_db})"
            )
        if not self.cell_radius_m > 0:
            problems.append("cell_radius_m must be positive")
        for name in ("noise_power", "circuit_power", "max_tx_power", "max_adc_input",
                     "max_snr", "diversity_gain"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be strictly positive")
        # zero ADC noise is accepted as a diagnostic limit
        if self.adc_noise < 0:
            problems.append("adc_noise must be non-negative")
        if self.shadow_std_db < 0:
            problems.append("shadow_std_db must be non-negative")
        if not 0 < self.pa_efficiency <= 1:
            problems.append(f"pa_efficiency must lie in (0, 1] (got {self.pa_efficiency})")
        if not self.min_distance_m > 0:
            problems.append("min_distance_m must be positive")
        if int(self.rng_seed) != self.rng_seed or self.rng_seed < 0:
            problems.append(f"rng_seed must be a non-negative integer (got {self.rng_seed})")

        return len(problems) == 0, problems

    def replace(self, **changes: Any) -> "ScenarioConfig":
        """Return a validated copy with some fields changed."""
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"Unknown scenario parameter(s): {', '.join(sorted(unknown))}")
        return replace(self, **changes)

    @property
    def antenna_ratio(self) -> float:
        """Antennas per UE, v = M/K."""
        return self.num_antennas / self.num_ues

    @property
    def gain_values_db(self) -> np.ndarray:
        """All admissible integer LNA gains in dB."""
        return np.arange(int(self.lna_min_db), int(self.lna_max_db) + 1)

    @property
    def num_gains(self) -> int:
        return int(self.lna_max_db) - int(self.lna_min_db) + 1


@dataclass(frozen=True)
class SolverParams:
    """
    Parameters of the gradient-assisted interior point solver.

    ``xi0=None`` selects a scale-matched initial penalty factor,
    U(p0) / |B(p0)|, computed from the initial point. Each penalty level runs
    passes of ``inner_steps`` steps until a pass stops improving, at most
    ``max_passes`` of them.
    """

    xi0: Optional[float] = None
    penalty_decay: float = 0.1
    stop_tolerance: float = 1e-4
    inner_steps: int = 200
    step0: float = 0.01
    xi_floor: float = 1e-18
    max_passes: int = 25

    def __post_init__(self):
        is_valid, problems = self.validate()
        if not is_valid:
            raise ConfigError(f"Invalid solver parameters: {'; '.join(problems)}")

    def validate(self) -> Tuple[bool, List[str]]:
        """
        Check every invariant of the solver parameters.

        Returns:
            Tuple of (is_valid, list_of_problems)
        """
        problems = []

        if self.xi0 is not None and not self.xi0 > 0:
            problems.append("xi0 must be positive")
        if not 0 < self.penalty_decay < 1:
            problems.append("penalty_decay must lie in (0, 1)")
        if not self.stop_tolerance > 0:
            problems.append("stop_tolerance must be positive")
        if self.inner_steps < 1:
            problems.append("inner_steps must be >= 1")
        if not self.step0 > 0:
            problems.append("step0 must be positive")
        if not self.xi_floor > 0:
            problems.append("xi_floor must be positive")
        if self.max_passes < 1:
            problems.append("max_passes must be >= 1")

        return len(problems) == 0, problems


# Config-file key -> (ScenarioConfig field, converter)
_SCENARIO_KEYS = {
    "cell_radius_m": ("cell_radius_m", float),
    "num_ues": ("num_ues", int),
    "num_antennas": ("num_antennas", int),
    "layout": ("layout", str),
    "noise_power": ("noise_power", float),
    "noise_power_dbm": ("noise_power", dbm_to_watts),
    "adc_noise": ("adc_noise", float),
    "adc_noise_dbm": ("adc_noise", dbm_to_watts),
    "shadow_std_db": ("shadow_std_db", float),
    "lna_min_db": ("lna_min_db", int),
    "lna_max_db": ("lna_max_db", int),
    "diversity_gain": ("diversity_gain", float),
    "diversity_gain_db": ("diversity_gain", db_to_linear),
    "circuit_power": ("circuit_power", float),
    "circuit_power_dbm": ("circuit_power", dbm_to_watts),
    "pa_efficiency": ("pa_efficiency", float),
    "max_tx_power": ("max_tx_power", float),
    "max_tx_power_dbm": ("max_tx_power", dbm_to_watts),
    "max_adc_input": ("max_adc_input", float),
    "max_adc_input_dbm": ("max_adc_input", dbm_to_watts),
    "max_snr": ("max_snr", float),
    "max_snr_db": ("max_snr", db_to_linear),
    "min_distance_m": ("min_distance_m", float),
    "rng_seed": ("rng_seed", int),
}

_SOLVER_KEYS = {
    "initial_penalty": ("xi0", float),
    "penalty_decay": ("penalty_decay", float),
    "stop_tolerance": ("stop_tolerance", float),
    "inner_steps": ("inner_steps", int),
    "step0": ("step0", float),
    "max_passes": ("max_passes", int),
}


@dataclass(frozen=True)
class ConfigFile:
    """Parsed contents of a configuration file."""

    scenario: ScenarioConfig
    solver: SolverParams
    realizations: Optional[int] = None
    solvers: Optional[Tuple[str, ...]] = None
    sweep: List[Tuple[str, List[Any]]] = field(default_factory=list)


def parse_config(data: Dict[str, Any], source: str = "<config>") -> ConfigFile:
    """
    Build typed configuration objects from flat key-value data.

    Args:
        data: Mapping as produced by a TOML parser
        source: Label used in error messages

    Returns:
        ConfigFile with scenario, solver and experiment settings

    Raises:
        ConfigError: On unknown keys, duplicate unit variants or invalid values
    """
    scenario_kwargs: Dict[str, Any] = {}
    solver_kwargs: Dict[str, Any] = {}
    realizations = None
    solvers = None
    sweep: List[Tuple[str, List[Any]]] = []

    def converted(key: str, convert, value: Any) -> Any:
        try:
            return convert(value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{source}: bad value {value!r} for '{key}': {e}") from e

    for key, value in data.items():
        if key in _SCENARIO_KEYS:
            target, convert = _SCENARIO_KEYS[key]
            if target in scenario_kwargs:
                raise ConfigError(f"{source}: '{key}' sets '{target}' a second time")
            scenario_kwargs[target] = converted(key, convert, value)
        elif key in _SOLVER_KEYS:
            target, convert = _SOLVER_KEYS[key]
            solver_kwargs[target] = converted(key, convert, value)
        elif key == "realizations":
            realizations = converted(key, int, value)
        elif key == "solvers":
            solvers = tuple(value.split(",") if isinstance(value, str) else value)
        elif key == "sweep":
            if not isinstance(value, dict):
                raise ConfigError(f"{source}: 'sweep' must be a table")
            for name, values in value.items():
                sweep.append((name, [tuple(v) if isinstance(v, list) else v for v in values]))
        else:
            raise ConfigError(f"{source}: unknown configuration key '{key}'")

    try:
        scenario = ScenarioConfig(**scenario_kwargs)
        solver = SolverParams(**solver_kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{source}: {e}") from e

    logger.debug(f"Parsed configuration from {source}: {scenario}")
    return ConfigFile(scenario=scenario, solver=solver, realizations=realizations,
                      solvers=solvers, sweep=sweep)


def load_config(path: Union[str, Path]) -> ConfigFile:
    """
    Load a TOML configuration file.

    Args:
        path: Path to the file

    Returns:
        Parsed ConfigFile

    Raises:
        ConfigError: If the file cannot be read or parsed
    """
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"Cannot read configuration file {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Malformed configuration file {path}: {e}") from e
    return parse_config(data, source=str(path))
