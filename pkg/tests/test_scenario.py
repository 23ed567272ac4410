import numpy as np
import pytest
from scipy import stats

from lna_ee_sim.config import ScenarioConfig
from lna_ee_sim.exceptions import ConfigError, SingularChannelError
from lna_ee_sim.scenario import (
    ChannelRealization,
    draw_realization,
    path_loss_db,
    sample_channel,
    sample_positions,
    zf_detector,
)
from lna_ee_sim.utils import make_stream


class TestPositions:
    def test_centralized_antennas_at_origin(self):
        cfg = ScenarioConfig.defaults(layout="centralized")
        geometry = sample_positions(cfg, make_stream(1))
        np.testing.assert_array_equal(geometry.antenna_positions, np.zeros((4, 2)))

    def test_everything_inside_the_cell(self):
        cfg = ScenarioConfig.defaults(num_ues=20, num_antennas=40)
        for seed in range(20):
            geometry = sample_positions(cfg, make_stream(seed))
            assert np.all(np.linalg.norm(geometry.ue_positions, axis=1) <= 100.0)
            assert np.all(np.linalg.norm(geometry.antenna_positions, axis=1) <= 100.0)

    def test_distances_are_clamped(self):
        cfg = ScenarioConfig.defaults(layout="centralized", min_distance_m=5.0, cell_radius_m=10.0,
                                     num_ues=50, num_antennas=50)
        geometry = sample_positions(cfg, make_stream(3))
        assert geometry.distances.shape == (50, 50)
        assert np.min(geometry.distances) >= 5.0

    def test_same_seed_same_geometry(self):
        cfg = ScenarioConfig.defaults()
        a = sample_positions(cfg, make_stream(9, 1, 2))
        b = sample_positions(cfg, make_stream(9, 1, 2))
        assert a.ue_positions.tobytes() == b.ue_positions.tobytes()
        assert a.antenna_positions.tobytes() == b.antenna_positions.tobytes()

    def test_radial_distribution_is_area_uniform(self):
        cfg = ScenarioConfig.defaults(num_ues=1, num_antennas=1, cell_radius_m=100.0)
        stream = make_stream(11)
        radii = np.array([np.linalg.norm(sample_positions(cfg, stream).ue_positions[0])
                          for _ in range(10_000)])
        result = stats.kstest(radii, lambda r: np.clip(r / 100.0, 0.0, 1.0) ** 2)
        assert result.statistic <= 0.02


class TestPathLoss:
    @pytest.mark.parametrize("distance, shadow, expected", [
        (1.0, 0.0, 46.0),
        (100.0, 0.0, 86.0),
        (10.0, 5.0, 71.0),
    ])
    def test_values(self, distance, shadow, expected):
        assert path_loss_db(distance, shadow) == pytest.approx(expected)

    def test_vectorized_and_monotone(self):
        d = np.array([1.0, 2.0, 10.0, 500.0])
        beta = 10.0 ** (-path_loss_db(d) / 10.0)
        assert np.all(np.diff(beta) < 0)

    @pytest.mark.parametrize("distance", [0.0, -3.0])
    def test_non_positive_distance(self, distance):
        with pytest.raises(ValueError):
            path_loss_db(distance)


class TestZeroForcing:
    def test_identity(self):
        f, norms = zf_detector(np.eye(2))
        np.testing.assert_allclose(f, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(norms, [1.0, 1.0])

    def test_scaled_identity(self):
        f, _ = zf_detector(2.0 * np.eye(2))
        np.testing.assert_allclose(f, 0.5 * np.eye(2), atol=1e-14)

    def test_all_ones_column(self):
        f, norms = zf_detector(np.ones((2, 1)))
        np.testing.assert_allclose(f, [[0.5, 0.5]], atol=1e-14)
        np.testing.assert_allclose(norms, [0.5])

    def test_residual_on_random_channels(self, rng):
        for _ in range(50):
            g = (rng.standard_normal((8, 4)) + 1j * rng.standard_normal((8, 4))) * 1e-4
            f, norms = zf_detector(g)
            assert np.linalg.norm(f @ g - np.eye(4)) <= 1e-8
            assert np.all(norms > 0)

    def test_rank_deficient(self):
        g = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        with pytest.raises(SingularChannelError):
            zf_detector(g)

    def test_more_ues_than_antennas(self):
        with pytest.raises(SingularChannelError):
            zf_detector(np.ones((1, 2)))


class TestChannel:
    def test_no_shadowing_gives_deterministic_beta(self):
        cfg = ScenarioConfig.defaults(shadow_std_db=0.0)
        geometry = sample_positions(cfg, make_stream(5))
        ch = sample_channel(cfg, geometry, make_stream(6))
        expected = 10.0 ** (-(46.0 + 20.0 * np.log10(geometry.distances)) / 10.0)
        np.testing.assert_allclose(ch.beta, expected, rtol=1e-12)

    def test_channel_assembly(self, defaults):
        ch, _ = draw_realization(defaults, make_stream(4))
        np.testing.assert_allclose(ch.channel, ch.fast_fading * np.sqrt(ch.beta))
        assert np.linalg.norm(ch.zf_detector @ ch.channel - np.eye(2)) <= 1e-8

    def test_fast_fading_has_unit_variance(self):
        cfg = ScenarioConfig.defaults(num_ues=50, num_antennas=100)
        stream = make_stream(8)
        samples = []
        for _ in range(20):
            geometry = sample_positions(cfg, stream)
            samples.append(np.abs(sample_channel(cfg, geometry, stream).fast_fading) ** 2)
        assert abs(np.mean(samples) - 1.0) <= 0.02

    def test_same_seed_same_channel(self, defaults):
        a, _ = draw_realization(defaults, make_stream(0, 3, 1))
        b, _ = draw_realization(defaults, make_stream(0, 3, 1))
        assert a.channel.tobytes() == b.channel.tobytes()
        assert a.digest == b.digest

    def test_different_keys_differ(self, defaults):
        a, _ = draw_realization(defaults, make_stream(0, 0, 0))
        b, _ = draw_realization(defaults, make_stream(0, 0, 1))
        assert a.digest != b.digest

    def test_from_matrix_shape_check(self, defaults):
        with pytest.raises(ConfigError):
            ChannelRealization.from_matrix(defaults, np.ones((3, 2)))

    def test_resampling_gives_up(self, monkeypatch, defaults):
        def always_singular(config, geometry, stream):
            raise SingularChannelError("forced")

        monkeypatch.setattr("lna_ee_sim.scenario.sample_channel", always_singular)
        with pytest.raises(SingularChannelError, match="3 draws"):
            draw_realization(defaults, make_stream(0), max_resamples=2)
