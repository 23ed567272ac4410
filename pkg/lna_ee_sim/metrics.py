"""
Closed-form SNR, spectral efficiency, energy efficiency and constraint slacks.

Both receiver models reduce to a per-UE SNR that is linear in the transmit
power, Gamma_k = T_k * p_k; only the SNR gain T_k differs between the shared
and the separate LNA structures.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import ScenarioConfig
from .exceptions import ConfigError, SingularChannelError
from .scenario import MAX_GRAM_CONDITION, ChannelRealization
from .utils import db_to_linear

logger = logging.getLogger(__name__)

LN2 = np.log(2.0)


@dataclass(frozen=True)
class PowerAllocation:
    """Per-UE transmit powers in watts."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(-1)
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError(f"transmit powers must be finite and non-negative (got {p})")
        object.__setattr__(self, "p", p)

    def __len__(self) -> int:
        return self.p.size

    @property
    def total(self) -> float:
        return float(np.sum(self.p))


PowerLike = Union[PowerAllocation, Sequence[float], np.ndarray]


def as_power(p: PowerLike) -> np.ndarray:
    """Return the power vector of a PowerAllocation or array-like."""
    if isinstance(p, PowerAllocation):
        return p.p
    return np.asarray(p, dtype=float)


@dataclass(frozen=True)
class LnaSetting:
    """
    LNA gain setting, either one shared gain or one gain per antenna.

    Gains are integers in dB.
    """

    mode: str
    shared_db: Optional[int] = None
    per_antenna_db: Optional[Tuple[int, ...]] = None

    @classmethod
    def shared(cls, gain_db: int) -> "LnaSetting":
        return cls(mode="shared", shared_db=int(gain_db))

    @classmethod
    def separate(cls, gains_db: Sequence[int]) -> "LnaSetting":
        return cls(mode="separate", per_antenna_db=tuple(int(g) for g in gains_db))

    @property
    def gains_db(self) -> Tuple[int, ...]:
        if self.mode == "shared":
            return (self.shared_db,)
        return self.per_antenna_db

    @property
    def linear(self) -> Union[float, np.ndarray]:
        """Linear gain Omega = 10^(Omega_dB / 10), scalar or per antenna."""
        if self.mode == "shared":
            return db_to_linear(self.shared_db)
        return db_to_linear(np.asarray(self.per_antenna_db, dtype=float))

    def check_range(self, config: ScenarioConfig) -> None:
        """
        Raises:
            ConfigError: If a gain lies outside [lna_min_db, lna_max_db] or the
                per-antenna vector has the wrong length
        """
        if self.mode == "separate" and len(self.per_antenna_db) != config.num_antennas:
            raise ConfigError(
                f"separate LNA setting has {len(self.per_antenna_db)} gains "
                f"for {config.num_antennas} antennas"
            )
        for g in self.gains_db:
            if not config.lna_min_db <= g <= config.lna_max_db:
                raise ConfigError(
                    f"LNA gain {g} dB outside [{config.lna_min_db}, {config.lna_max_db}] dB"
                )


@dataclass(frozen=True)
class SlackReport:
    """
    Signed margins of the power, ADC-saturation and SNR-cap constraints.

    A point is feasible iff every margin is non-negative.
    """

    tx_upper: np.ndarray   # P_max - p_k, per UE
    tx_lower: np.ndarray   # p_k, per UE
    adc: np.ndarray        # P_max^ADC - Omega_m (sum_k |g_mk|^2 p_k + sigma_N^2), per antenna
    snr: np.ndarray        # Gamma_max - T_k p_k, per UE

    @property
    def feasible(self) -> bool:
        return self.min_slack >= 0.0

    @property
    def strictly_feasible(self) -> bool:
        return self.min_slack > 0.0

    @property
    def min_slack(self) -> float:
        return float(min(np.min(self.tx_upper), np.min(self.tx_lower),
                         np.min(self.adc), np.min(self.snr)))

    def violations(self) -> List[Tuple[str, int]]:
        """List of (constraint, index) pairs with a negative margin."""
        out = []
        for name in ("tx_upper", "tx_lower", "adc", "snr"):
            for idx in np.flatnonzero(getattr(self, name) < 0):
                out.append((name, int(idx)))
        return out


@dataclass(frozen=True)
class EeEvaluation:
    """SNR, spectral and energy efficiency of one operating point."""

    snr: np.ndarray
    se: np.ndarray
    r_sum: float
    p_sum: float
    ee: float
    slacks: SlackReport

    @property
    def feasible(self) -> bool:
        return self.slacks.feasible


def snr_gain_shared(omega: Union[float, np.ndarray], ch: ChannelRealization) -> np.ndarray:
    """
    SNR per watt T_k = Omega / ((Omega sigma_N^2 + sigma_ADC^2) ||f_k||^2).

    Args:
        omega: Linear gain, scalar or array of shape (B,)
        ch: Channel realization

    Returns:
        Array of shape (K,) for a scalar gain, (B, K) for an array of gains
    """
    cfg = ch.config
    om = np.asarray(omega, dtype=float)
    t = om[..., None] / ((om[..., None] * cfg.noise_power + cfg.adc_noise) * ch.zf_row_norm_sq)
    return t


def snr_shared(p: PowerLike, omega: float, ch: ChannelRealization) -> np.ndarray:
    """Per-UE SNR at the ZF output under a shared LNA gain."""
    return snr_gain_shared(omega, ch) * as_power(p)


def separate_detector(
    omega_vec: np.ndarray,
    ch: ChannelRealization,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    ZF detector of the amplified channel diag(sqrt(Omega_m)) G and the SNR gains.

    Args:
        omega_vec: Linear per-antenna gains, shape (M,) or (B, M)
        ch: Channel realization

    Returns:
        Tuple of (F_hat with shape (..., K, M), T with shape (..., K)) where
        T_k = 1 / (sigma_N^2 sum_m Omega_m |f_hat_km|^2 + sigma_ADC^2 ||f_hat_k||^2)

    Raises:
        SingularChannelError: If any amplified Gram matrix is ill-conditioned
    """
    om = np.asarray(omega_vec, dtype=float)
    detector, t, usable = separate_terms(om, ch)
    if not np.all(usable):
        raise SingularChannelError(
            f"amplified cond(G^H G) exceeds {MAX_GRAM_CONDITION:.0e} "
            f"for {int(np.sum(~usable))} gain vector(s)"
        )
    return detector, t


def separate_terms(
    omega_vec: np.ndarray,
    ch: ChannelRealization,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Like :func:`separate_detector` but flags ill-conditioned gain vectors
    instead of raising.

    Returns:
        Tuple of (F_hat, T, usable) where ``usable`` is a boolean of shape (...)
    """
    cfg = ch.config
    om = np.asarray(omega_vec, dtype=float)
    if np.any(om <= 0):
        raise ValueError("per-antenna gains must be strictly positive")
    amplified = np.sqrt(om)[..., :, None] * ch.channel
    condition = np.linalg.cond(amplified) ** 2
    usable = np.isfinite(condition) & (condition <= MAX_GRAM_CONDITION)
    detector = np.linalg.pinv(amplified)
    mag_sq = np.abs(detector) ** 2
    noise = cfg.noise_power * np.sum(mag_sq * om[..., None, :], axis=-1)
    quantization = cfg.adc_noise * np.sum(mag_sq, axis=-1)
    return detector, 1.0 / (noise + quantization), usable


def snr_gain_separate(omega_vec: np.ndarray, ch: ChannelRealization) -> np.ndarray:
    """SNR per watt under per-antenna LNA gains, shape (K,) or (B, K)."""
    return separate_detector(omega_vec, ch)[1]


def snr_separate(p: PowerLike, omega_vec: np.ndarray, ch: ChannelRealization) -> np.ndarray:
    """Per-UE SNR at the ZF output with one LNA per antenna."""
    return snr_gain_separate(omega_vec, ch) * as_power(p)


def spectral_efficiency(snr: np.ndarray, diversity_gain: float, max_snr: float) -> np.ndarray:
    """R_k = log2(1 + A_d min(Gamma_k, Gamma_max)) in bits/s/Hz."""
    return np.log2(1.0 + diversity_gain * np.minimum(np.asarray(snr, dtype=float), max_snr))


def energy_efficiency(
    se: np.ndarray,
    p: PowerLike,
    circuit_power: float,
    pa_efficiency: float,
) -> float:
    """U = sum_k R_k / (P_c + sum_k p_k / eta) in bits/s/Hz per watt."""
    return float(np.sum(se) / (circuit_power + np.sum(as_power(p)) / pa_efficiency))


def _slacks(
    p: np.ndarray,
    snr_gain: np.ndarray,
    omega_per_antenna: np.ndarray,
    ch: ChannelRealization,
    config: ScenarioConfig,
) -> SlackReport:
    received = ch.gain_sq @ p + config.noise_power
    return SlackReport(
        tx_upper=config.max_tx_power - p,
        tx_lower=p.copy(),
        adc=config.max_adc_input - omega_per_antenna * received,
        snr=config.max_snr - snr_gain * p,
    )


def check_constraints_shared(
    p: PowerLike,
    omega: float,
    ch: ChannelRealization,
    config: ScenarioConfig,
) -> SlackReport:
    """Signed margins of all constraints under a shared LNA gain."""
    pv = as_power(p)
    omega_vec = np.full(config.num_antennas, float(omega))
    return _slacks(pv, snr_gain_shared(omega, ch), omega_vec, ch, config)


def check_constraints_separate(
    p: PowerLike,
    omega_vec: np.ndarray,
    ch: ChannelRealization,
    config: ScenarioConfig,
) -> SlackReport:
    """Signed margins of all constraints with one LNA per antenna."""
    pv = as_power(p)
    om = np.asarray(omega_vec, dtype=float)
    return _slacks(pv, snr_gain_separate(om, ch), om, ch, config)


def _evaluate(p: np.ndarray, snr: np.ndarray, slacks: SlackReport, config: ScenarioConfig) -> EeEvaluation:
    se = spectral_efficiency(snr, config.diversity_gain, config.max_snr)
    p_sum = float(np.sum(p) / config.pa_efficiency)
    return EeEvaluation(
        snr=snr,
        se=se,
        r_sum=float(np.sum(se)),
        p_sum=p_sum,
        ee=energy_efficiency(se, p, config.circuit_power, config.pa_efficiency),
        slacks=slacks,
    )


def evaluate_shared(p: PowerLike, omega: float, ch: ChannelRealization,
                    config: Optional[ScenarioConfig] = None) -> EeEvaluation:
    """Full evaluation of a power vector under a shared LNA gain."""
    config = config or ch.config
    pv = as_power(p)
    return _evaluate(pv, snr_shared(pv, omega, ch),
                     check_constraints_shared(pv, omega, ch, config), config)


def evaluate_separate(p: PowerLike, omega_vec: np.ndarray, ch: ChannelRealization,
                      config: Optional[ScenarioConfig] = None) -> EeEvaluation:
    """Full evaluation of a power vector with one LNA per antenna."""
    config = config or ch.config
    pv = as_power(p)
    return _evaluate(pv, snr_separate(pv, omega_vec, ch),
                     check_constraints_separate(pv, omega_vec, ch, config), config)
