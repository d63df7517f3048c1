"""AWGN and slow multipath Rayleigh fading at chip resolution.

Every subcarrier row goes through the same tapped delay line with one
fading draw per frame; delayed chips that spill over a frame boundary are
taken from the previous frame, so intersymbol interference is physical.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from mcdcsk.errors import DimensionError
from mcdcsk.schemas.schemas import ChannelProfile, FadingLaw

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FadingDraw:
    """Tap amplitudes lambda_l of one frame."""

    lambdas: np.ndarray

    def __post_init__(self):
        lambdas = np.asarray(self.lambdas, dtype=float).reshape(-1)
        if np.any(lambdas < 0.0):
            raise DimensionError("fading amplitudes are nonnegative")
        lambdas.flags.writeable = False
        object.__setattr__(self, "lambdas", lambdas)

    @property
    def power(self) -> float:
        """Sum of lambda_l^2."""
        return float(np.dot(self.lambdas, self.lambdas))


def rayleigh_scales(profile: ChannelProfile) -> np.ndarray:
    """Scale sigma_l = sqrt(E[lambda_l^2] / 2) of every path."""
    return np.sqrt(np.asarray(profile.gains) / 2.0)


def draw_fading_batch(profile: ChannelProfile, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` independent frames of tap amplitudes, shape (n, L)."""
    if profile.fading == FadingLaw.NONE:
        return np.ones((n, len(profile.paths)))
    return rng.rayleigh(1.0, size=(n, len(profile.paths))) * rayleigh_scales(profile)


def draw_fading(profile: ChannelProfile, rng: np.random.Generator) -> FadingDraw:
    """Draw the tap amplitudes held constant over one frame."""
    return FadingDraw(lambdas=draw_fading_batch(profile, rng, 1)[0])


def propagate(
    frames: np.ndarray,
    lead: np.ndarray,
    lambdas: np.ndarray,
    delays,
    n0: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Pass ``n`` consecutive frames through the channel.

    frames: (n, M, beta) transmitted rows; lead: (M, tau_max) chips sent just
    before the first frame; lambdas: (n, L) one draw per frame.
    received[j, r, k] = sum_l lambdas[j, l] * stream[r, j*beta + k - tau_l] + noise.
    """
    frames = np.asarray(frames, dtype=float)
    n, rows, beta = frames.shape
    delays = np.asarray(delays, dtype=int)
    tau_max = int(delays.max()) if delays.size else 0
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.shape != (n, delays.size):
        raise DimensionError(f"expected fading draws of shape {(n, delays.size)}, got {lambdas.shape}")
    lead = np.asarray(lead, dtype=float).reshape(rows, -1)
    if lead.shape != (rows, tau_max):
        raise DimensionError(f"previous-frame tail must have shape {(rows, tau_max)}, got {lead.shape}")
    if tau_max >= beta:
        logger.warning(f"Path delay {tau_max} reaches the frame length {beta}; ISI dominates")

    stream = np.concatenate([lead, frames.transpose(1, 0, 2).reshape(rows, n * beta)], axis=1)
    received = np.zeros_like(frames)
    for l, tau in enumerate(delays):
        start = tau_max - int(tau)
        shifted = stream[:, start:start + n * beta].reshape(rows, n, beta).transpose(1, 0, 2)
        received += lambdas[:, l, None, None] * shifted

    if n0 > 0.0:
        received += rng.normal(0.0, math.sqrt(n0 / 2.0), size=received.shape)
    return received


def apply_channel(
    frame_rows: np.ndarray,
    prev_frame_tail: np.ndarray,
    draw: FadingDraw,
    profile: ChannelProfile,
    rng: np.random.Generator,
) -> np.ndarray:
    """Receive one M x beta frame given the tail of the frame sent before it."""
    frame_rows = np.asarray(frame_rows, dtype=float)
    if frame_rows.ndim != 2:
        raise DimensionError(f"expected an M x beta matrix, got shape {frame_rows.shape}")
    if draw.lambdas.size != len(profile.paths):
        raise DimensionError(f"{draw.lambdas.size} fading amplitudes for {len(profile.paths)} paths")
    return propagate(
        frame_rows[None], prev_frame_tail, draw.lambdas[None], profile.delays, profile.n0, rng
    )[0]


def awgn_only(frame_rows: np.ndarray, n0: float, rng: np.random.Generator) -> np.ndarray:
    """Single unit path, no fading: add white noise of variance N0/2 per chip."""
    frame_rows = np.asarray(frame_rows, dtype=float)
    profile = ChannelProfile.awgn(n0=n0)
    empty_tail = np.zeros((frame_rows.shape[0], 0))
    return apply_channel(frame_rows, empty_tail, FadingDraw(np.ones(1)), profile, rng)


def propagate_isolated(
    frames: np.ndarray,
    lambdas: np.ndarray,
    delays,
    n0: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Like :func:`propagate`, but every frame is preceded by silence (no ISI)."""
    frames = np.asarray(frames, dtype=float)
    beta = frames.shape[-1]
    received = np.zeros_like(frames)
    for l, tau in enumerate(delays):
        if tau < beta:
            received[..., tau:] += lambdas[:, l, None, None] * frames[..., :beta - tau]
    if n0 > 0.0:
        received += rng.normal(0.0, math.sqrt(n0 / 2.0), size=received.shape)
    return received
