"""
Exception hierarchy for the LNA energy-efficiency simulator.
"""


class LnaEeError(Exception):
    """Base exception for all simulator errors."""
    pass


class ConfigError(LnaEeError):
    """Exception raised when a configuration value is missing or invalid."""
    pass


class SingularChannelError(LnaEeError):
    """Exception raised when the zero-forcing Gram matrix is ill-conditioned."""
    pass


class InfeasibleScenarioError(LnaEeError):
    """Exception raised when a gain setting leaves no strictly feasible power vector."""
    pass


class BoundaryPointError(LnaEeError):
    """Exception raised when a barrier gradient is requested outside the interior."""
    pass


class AllInfeasibleError(LnaEeError):
    """Exception raised when every LNA gain in range is infeasible."""
    pass


class CombinatoricsGuardError(LnaEeError):
    """Exception raised when an exhaustive enumeration exceeds its size guard."""
    pass


class ExportError(LnaEeError, OSError):
    """Exception raised when result files cannot be written."""
    pass
