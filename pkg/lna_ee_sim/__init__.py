"""
LNA EE Sim - Energy-efficiency optimization of uplink multi-user MIMO with a shared LNA gain.

This package jointly chooses the per-UE transmit powers and the LNA gain that
maximize the energy efficiency of a zero-forcing receiver whose ADCs must not
saturate, and provides the reference solvers and Monte Carlo harness used to
study it.

Simplified Usage:
    from lna_ee_sim import ScenarioConfig, get_study

    study = get_study(ScenarioConfig.defaults(cell_radius_m=300.0), 7, 0, 0)
    outcome = study.bgaip()
    print(outcome.u, outcome.omega_db, outcome.p)
"""

__version__ = '1.0.0'
__author__ = 'LNA EE Sim Team'

# Exceptions
from .exceptions import (
    LnaEeError,
    ConfigError,
    SingularChannelError,
    InfeasibleScenarioError,
    BoundaryPointError,
    AllInfeasibleError,
    CombinatoricsGuardError,
    ExportError,
)

# Configuration
from .config import ScenarioConfig, SolverParams, ConfigFile, load_config, parse_config
from .utils import db_to_linear, dbm_to_watts, make_stream

# Scenario and metrics
from .scenario import ChannelRealization, Geometry, draw_realization, path_loss_db, sample_channel, sample_positions, zf_detector
from .metrics import (
    EeEvaluation,
    LnaSetting,
    PowerAllocation,
    SlackReport,
    check_constraints_separate,
    check_constraints_shared,
    energy_efficiency,
    evaluate_separate,
    evaluate_shared,
    snr_separate,
    snr_shared,
    spectral_efficiency,
)

# Solvers
from .gaip import GaipResult, ascent_step, gaip_solve, initial_feasible_point, penalty_gradient, penalty_value
from .bgaip import BgaipResult, SeparateResult, bgaip_solve, bisect_gain, separate_lna_solve
from .oracles import (
    OracleResult,
    brute_force,
    heuristic_max_gain,
    heuristic_max_power,
    hybrid1,
    hybrid2,
)

# Simplified facade (recommended)
from .facade import EEStudy, SolverOutcome, get_study

# Decorators
from .decorators import solver_method

# Experiments
from .harness import ExperimentSpec, ResultRecord, build_spec, export, run_experiment, summarize

__all__ = [
    # Exceptions
    'LnaEeError',
    'ConfigError',
    'SingularChannelError',
    'InfeasibleScenarioError',
    'BoundaryPointError',
    'AllInfeasibleError',
    'CombinatoricsGuardError',
    'ExportError',

    # Configuration
    'ScenarioConfig',
    'SolverParams',
    'ConfigFile',
    'load_config',
    'parse_config',
    'db_to_linear',
    'dbm_to_watts',
    'make_stream',

    # Scenario and metrics
    'ChannelRealization',
    'Geometry',
    'draw_realization',
    'path_loss_db',
    'sample_channel',
    'sample_positions',
    'zf_detector',
    'EeEvaluation',
    'LnaSetting',
    'PowerAllocation',
    'SlackReport',
    'check_constraints_separate',
    'check_constraints_shared',
    'energy_efficiency',
    'evaluate_separate',
    'evaluate_shared',
    'snr_separate',
    'snr_shared',
    'spectral_efficiency',

    # Solvers
    'GaipResult',
    'ascent_step',
    'gaip_solve',
    'initial_feasible_point',
    'penalty_gradient',
    'penalty_value',
    'BgaipResult',
    'SeparateResult',
    'bgaip_solve',
    'bisect_gain',
    'separate_lna_solve',
    'OracleResult',
    'brute_force',
    'heuristic_max_gain',
    'heuristic_max_power',
    'hybrid1',
    'hybrid2',

    # Simplified API (recommended)
    'EEStudy',
    'SolverOutcome',
    'get_study',

    # Decorators
    'solver_method',

    # Experiments
    'ExperimentSpec',
    'ResultRecord',
    'build_spec',
    'export',
    'run_experiment',
    'summarize',
]
