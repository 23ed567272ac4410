"""
Random cell geometries, channel realizations and the zero-forcing detector.
"""
import hashlib
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg

from .config import ScenarioConfig
from .exceptions import ConfigError, SingularChannelError

logger = logging.getLogger(__name__)

# Path-loss intercept (dB at 1 m) and slope (dB per decade)
PATH_LOSS_INTERCEPT_DB = 46.0
PATH_LOSS_SLOPE_DB = 20.0

MAX_GRAM_CONDITION = 1e12
MAX_RESAMPLES = 10


@dataclass(frozen=True)
class Geometry:
    """UE and antenna positions with the clamped link distances."""

    ue_positions: np.ndarray         # (K, 2) meters
    antenna_positions: np.ndarray    # (M, 2) meters
    distances: np.ndarray            # (M, K) meters


@dataclass(frozen=True)
class ChannelRealization:
    """
    One draw of large- and small-scale fading together with its ZF detector.

    Instances are immutable and safe to share between threads.
    """

    config: ScenarioConfig
    geometry: Optional[Geometry]
    shadow_db: np.ndarray       # (M, K)
    beta: np.ndarray            # (M, K) linear power gain
    fast_fading: np.ndarray     # (M, K) complex
    channel: np.ndarray         # (M, K) complex, g_mk = h_mk * sqrt(beta_mk)
    zf_detector: np.ndarray     # (K, M) complex
    zf_row_norm_sq: np.ndarray  # (K,)

    @classmethod
    def from_matrix(cls, config: ScenarioConfig, channel: np.ndarray) -> "ChannelRealization":
        """
        Wrap a given channel matrix, e.g. a synthetic test channel.

        The matrix is split as |g_mk|^2 -> beta and the unit-modulus phase ->
        fast fading; no geometry is attached.

        Raises:
            ConfigError: If the matrix shape does not match (M, K) of the config
            SingularChannelError: If the ZF detector does not exist
        """
        g = np.atleast_2d(np.asarray(channel, dtype=complex))
        if g.shape != (config.num_antennas, config.num_ues):
            raise ConfigError(
                f"Channel shape {g.shape} does not match "
                f"(M, K) = ({config.num_antennas}, {config.num_ues})"
            )
        beta = np.abs(g) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            h = np.where(beta > 0, g / np.sqrt(beta), 0.0)
        detector, norms = zf_detector(g)
        return cls(
            config=config,
            geometry=None,
            shadow_db=np.zeros(g.shape),
            beta=beta,
            fast_fading=h,
            channel=g,
            zf_detector=detector,
            zf_row_norm_sq=norms,
        )

    @property
    def gain_sq(self) -> np.ndarray:
        """|g_mk|^2 as an (M, K) real matrix."""
        return np.abs(self.channel) ** 2

    @property
    def digest(self) -> str:
        """Short SHA-1 digest of the channel matrix, used to pair solver records."""
        return hashlib.sha1(np.ascontiguousarray(self.channel).tobytes()).hexdigest()[:16]


def _uniform_disc(radius: float, count: int, stream: np.random.Generator) -> np.ndarray:
    # sqrt of a uniform radius variate gives a uniform density per unit area
    r = radius * np.sqrt(stream.uniform(0.0, 1.0, count))
    theta = stream.uniform(0.0, 2.0 * np.pi, count)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def sample_positions(config: ScenarioConfig, stream: np.random.Generator) -> Geometry:
    """
    Drop UEs (and, for the distributed layout, antennas) uniformly in the cell.

    Args:
        config: Scenario configuration
        stream: Random stream; UEs are drawn before antennas

    Returns:
        Geometry with distances clamped to ``config.min_distance_m``
    """
    ues = _uniform_disc(config.cell_radius_m, config.num_ues, stream)
    if config.layout == "centralized":
        antennas = np.zeros((config.num_antennas, 2))
    else:
        antennas = _uniform_disc(config.cell_radius_m, config.num_antennas, stream)

    distances = np.linalg.norm(antennas[:, None, :] - ues[None, :, :], axis=2)
    distances = np.maximum(distances, config.min_distance_m)
    return Geometry(ue_positions=ues, antenna_positions=antennas, distances=distances)


def path_loss_db(
    distance_m: Union[float, np.ndarray],
    shadow_db: Union[float, np.ndarray] = 0.0,
) -> Union[float, np.ndarray]:
    """
    Large-scale attenuation 46 + 20 log10(d) + V in dB.

    The linear power gain is ``10 ** (-path_loss_db / 10)``.

    Raises:
        ValueError: If any distance is not strictly positive
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError(f"path loss is undefined for non-positive distance {distance_m!r}")
    loss = PATH_LOSS_INTERCEPT_DB + PATH_LOSS_SLOPE_DB * np.log10(d) + np.asarray(shadow_db)
    return float(loss) if loss.ndim == 0 else loss


def zf_detector(channel: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Zero-forcing detector F = (G^H G)^-1 G^H and its squared row norms.

    The pseudo-inverse is computed through a thin QR factorization, which keeps
    the residual F G - I at the level of cond(G) rather than cond(G)^2.

    Args:
        channel: (M, K) complex matrix with M >= K

    Returns:
        Tuple of (F with shape (K, M), ||f_k||^2 with shape (K,))

    Raises:
        SingularChannelError: If M < K or cond(G^H G) exceeds 1e12
    """
    g = np.atleast_2d(np.asarray(channel, dtype=complex))
    m, k = g.shape
    if k == 0 or m < k:
        raise SingularChannelError(f"zero-forcing needs M >= K >= 1 (got M={m}, K={k})")

    q, r = scipy.linalg.qr(g, mode="economic")
    diag = np.abs(np.diag(r))
    if np.min(diag) == 0.0:
        raise SingularChannelError("channel matrix is rank deficient")
    gram_condition = np.linalg.cond(r) ** 2
    if not np.isfinite(gram_condition) or gram_condition > MAX_GRAM_CONDITION:
        raise SingularChannelError(f"cond(G^H G) = {gram_condition:.3e} exceeds {MAX_GRAM_CONDITION:.0e}")

    detector = scipy.linalg.solve_triangular(r, q.conj().T)
    row_norm_sq = np.sum(np.abs(detector) ** 2, axis=1)
    return detector, row_norm_sq


def sample_channel(
    config: ScenarioConfig,
    geometry: Geometry,
    stream: np.random.Generator,
) -> ChannelRealization:
    """
    Draw shadowing and Rayleigh fading on a fixed geometry.

    Raises:
        SingularChannelError: Propagated from :func:`zf_detector`
    """
    shape = geometry.distances.shape
    shadow = stream.normal(0.0, config.shadow_std_db, shape) if config.shadow_std_db > 0 \
        else np.zeros(shape)
    beta = 10.0 ** (-path_loss_db(geometry.distances, shadow) / 10.0)
    h = (stream.standard_normal(shape) + 1j * stream.standard_normal(shape)) / np.sqrt(2.0)
    g = h * np.sqrt(beta)
    detector, norms = zf_detector(g)
    return ChannelRealization(
        config=config,
        geometry=geometry,
        shadow_db=shadow,
        beta=beta,
        fast_fading=h,
        channel=g,
        zf_detector=detector,
        zf_row_norm_sq=norms,
    )


def draw_realization(
    config: ScenarioConfig,
    stream: np.random.Generator,
    max_resamples: int = MAX_RESAMPLES,
) -> Tuple[ChannelRealization, int]:
    """
    Draw geometry and channel, resampling the whole realization when singular.

    Args:
        config: Scenario configuration
        stream: Realization stream
        max_resamples: Retries allowed after the first draw

    Returns:
        Tuple of (realization, number_of_resamples)

    Raises:
        SingularChannelError: If every attempt produced a singular channel
    """
    last_error: Optional[SingularChannelError] = None
    for attempt in range(max_resamples + 1):
        geometry = sample_positions(config, stream)
        try:
            return sample_channel(config, geometry, stream), attempt
        except SingularChannelError as e:
            last_error = e
            logger.warning(f"Singular channel on attempt {attempt + 1}, resampling: {e}")
    raise SingularChannelError(
        f"no usable channel after {max_resamples + 1} draws: {last_error}"
    ) from last_error
