"""
Shared fixtures: small deterministic configurations and synthetic channels.
"""
import numpy as np
import pytest

from lna_ee_sim.config import ScenarioConfig
from lna_ee_sim.scenario import ChannelRealization, draw_realization
from lna_ee_sim.utils import db_to_linear, make_stream


@pytest.fixture
def defaults():
    """Default scenario (K=2, M=4, distributed, 100 m cell)."""
    return ScenarioConfig.defaults()


@pytest.fixture
def single_ue_config():
    return ScenarioConfig.defaults(num_ues=1, num_antennas=2)


def equal_gain_column(config: ScenarioConfig, snr_gain: float, omega: float) -> ChannelRealization:
    """
    Single-UE channel G = c [1, ..., 1]^T whose shared-LNA SNR per watt at
    ``omega`` equals ``snr_gain``.

    With ||f||^2 = 1 / (M c^2), T = Omega M c^2 / (Omega sigma_N^2 + sigma_ADC^2).
    """
    m = config.num_antennas
    c2 = snr_gain * (omega * config.noise_power + config.adc_noise) / (omega * m)
    return ChannelRealization.from_matrix(config, np.full((m, 1), np.sqrt(c2), dtype=complex))


@pytest.fixture
def synthetic_single_ue(single_ue_config):
    """Factory for single-UE channels with a prescribed SNR gain at 30 dB."""
    omega = db_to_linear(30)

    def build(snr_gain: float) -> ChannelRealization:
        return equal_gain_column(single_ue_config, snr_gain, omega)

    return build


@pytest.fixture
def realization():
    """Factory drawing the realization identified by (config, seed, *keys)."""

    def draw(config: ScenarioConfig, seed: int = 0, *keys: int) -> ChannelRealization:
        channel, _ = draw_realization(config, make_stream(seed, *keys))
        return channel

    return draw


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
