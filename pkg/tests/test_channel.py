"""Tests for the AWGN and multipath Rayleigh channel."""

import logging
import math

import numpy as np
import pytest
from scipy import stats

from mcdcsk.core.channel import (
    FadingDraw,
    apply_channel,
    awgn_only,
    draw_fading,
    draw_fading_batch,
    propagate,
    propagate_isolated,
)
from mcdcsk.errors import DimensionError
from mcdcsk.schemas.schemas import ChannelProfile


@pytest.fixture
def rng():
    return np.random.default_rng(11)


class TestAwgn:
    """Tests for the noise-only channel."""

    def test_zero_noise_is_identity(self, rng):
        rows = rng.standard_normal((4, 16))
        assert np.array_equal(awgn_only(rows, 0.0, rng), rows)

    def test_noise_variance_is_half_n0(self, rng):
        received = awgn_only(np.zeros((4, 50_000)), 2.0, rng)
        assert received.var() == pytest.approx(1.0, rel=0.03)

    def test_rows_get_independent_noise(self, rng):
        received = awgn_only(np.zeros((2, 50_000)), 2.0, rng)
        assert abs(np.corrcoef(received)[0, 1]) < 0.03


class TestMultipath:
    """Tests for the tapped delay line."""

    def test_delayed_copy_uses_previous_tail(self):
        profile = ChannelProfile.rayleigh((0.5, 0.5), (0, 2), n0=0.0)
        rows = np.arange(12, dtype=float).reshape(2, 6)
        tail = np.array([[-1.0, -2.0], [-3.0, -4.0]])
        received = apply_channel(rows, tail, FadingDraw(np.array([1.0, 0.5])), profile, np.random.default_rng(0))
        expected = rows.copy()
        expected[:, 2:] += 0.5 * rows[:, :4]
        expected[:, :2] += 0.5 * tail
        assert np.allclose(received, expected)

    def test_consecutive_frames_share_a_stream(self):
        frames = np.arange(24, dtype=float).reshape(2, 2, 6)
        lambdas = np.array([[1.0, 1.0], [2.0, 1.0]])
        lead = np.zeros((2, 3))
        received = propagate(frames, lead, lambdas, (0, 3), 0.0, np.random.default_rng(0))
        # second frame's first chips carry the last three chips of the first frame
        assert np.allclose(received[1, :, :3], 2.0 * frames[1, :, :3] + frames[0, :, 3:])
        assert np.allclose(received[0, :, :3], frames[0, :, :3])

    def test_rayleigh_power_gains(self, rng):
        profile = ChannelProfile.rayleigh((4 / 7, 2 / 7, 1 / 7), (0, 3, 6))
        lambdas = draw_fading_batch(profile, rng, 200_000)
        assert np.mean(lambdas**2, axis=0) == pytest.approx([4 / 7, 2 / 7, 1 / 7], rel=0.02)

    @pytest.mark.parametrize("path", [0, 1, 2])
    def test_rayleigh_amplitude_law(self, path):
        profile = ChannelProfile.rayleigh((4 / 7, 2 / 7, 1 / 7), (0, 3, 6))
        lambdas = draw_fading_batch(profile, np.random.default_rng(23), 1_000_000)
        scale = math.sqrt(profile.gains[path] / 2.0)
        assert stats.kstest(lambdas[:, path], stats.rayleigh(scale=scale).cdf).statistic < 0.005

    def test_isolated_frames_see_no_previous_frame(self):
        frames = np.arange(24, dtype=float).reshape(2, 2, 6)
        lambdas = np.array([[1.0, 1.0], [2.0, 1.0]])
        received = propagate_isolated(frames, lambdas, (0, 3), 0.0, np.random.default_rng(0))
        assert np.allclose(received[1, :, :3], 2.0 * frames[1, :, :3])
        assert np.allclose(received[1, :, 3:], 2.0 * frames[1, :, 3:] + frames[1, :, :3])

    def test_single_draw(self, rng):
        draw = draw_fading(ChannelProfile.rayleigh((0.5, 0.5), (0, 2)), rng)
        assert draw.lambdas.shape == (2,)
        assert draw.power == pytest.approx(float(np.sum(draw.lambdas**2)))

    def test_awgn_profile_has_unit_tap(self, rng):
        assert np.array_equal(draw_fading_batch(ChannelProfile.awgn(), rng, 3), np.ones((3, 1)))

    def test_negative_amplitude_rejected(self):
        with pytest.raises(DimensionError):
            FadingDraw(np.array([-0.1]))

    def test_wrong_tail_shape(self, rng):
        profile = ChannelProfile.rayleigh((0.5, 0.5), (0, 2))
        with pytest.raises(DimensionError):
            apply_channel(np.ones((2, 6)), np.zeros((2, 1)), FadingDraw(np.ones(2)), profile, rng)

    def test_long_delay_logs_warning(self, rng, caplog):
        frames = np.ones((1, 2, 4))
        with caplog.at_level(logging.WARNING, logger="mcdcsk.core.channel"):
            propagate(frames, np.zeros((2, 5)), np.ones((1, 2)), (0, 5), 0.0, rng)
        assert "ISI dominates" in caplog.text


class TestProfileValidation:
    """Tests for the channel profile invariants."""

    def test_duplicate_delays_rejected(self):
        with pytest.raises(ValueError):
            ChannelProfile.rayleigh((0.5, 0.5), (0, 0))

    def test_first_delay_must_be_zero(self):
        with pytest.raises(ValueError):
            ChannelProfile.rayleigh((0.5, 0.5), (1, 2))

    def test_profile_id(self):
        assert ChannelProfile.awgn().profile_id == "awgn"
        assert ChannelProfile.rayleigh((0.5, 0.5), (0, 2)).profile_id == "rayleigh-L2-g0.5/0.5-d0/2"
