"""Transmit structures for DCSK and MC-DCSK, plus the bandwidth design arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mcdcsk.core.chaosgen import ChaoticSequence
from mcdcsk.errors import ConfigurationError, DimensionError, DomainError
from mcdcsk.schemas.schemas import SystemConfig


def spreading_factor(t_b: float, bandwidth: float, m: int, alpha: float) -> int:
    """Largest integer beta such that M subcarriers of width (1+alpha)/T_c fit in B."""
    if t_b <= 0 or bandwidth <= 0:
        raise ConfigurationError("bit duration and bandwidth must be positive")
    if m < 2:
        raise ConfigurationError(f"MC-DCSK needs at least 2 subcarriers, got M={m}")
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError(f"roll-off must lie in [0, 1], got {alpha}")
    beta = math.floor(t_b * bandwidth / (m * (1.0 + alpha)) + 1e-9)
    if beta < 1:
        raise ConfigurationError(
            f"band B={bandwidth} cannot carry M={m} subcarriers at T_b={t_b} (beta would be 0)"
        )
    return beta


@dataclass(frozen=True)
class SubcarrierPlan:
    f_p: float
    frequencies: np.ndarray
    b_c: float
    delta: float

    @property
    def total_bandwidth(self) -> float:
        return self.frequencies.size * self.b_c


def frequency_plan(config: SystemConfig, f_p: float = 0.0) -> SubcarrierPlan:
    """Subcarrier frequencies f_i = f_p + i/T_c and the spacing (1+alpha)/T_c.

    Documentation output only: the simulation never mixes carriers.
    """
    frequencies = f_p + np.arange(1, config.m + 1) / config.t_c
    width = (1.0 + config.alpha) / config.t_c
    return SubcarrierPlan(f_p=f_p, frequencies=frequencies, b_c=width, delta=width)


def spectral_efficiency(config: SystemConfig) -> float:
    """Data bits per frame over the time-bandwidth product beta*T_c * M*B_c."""
    plan = frequency_plan(config)
    return config.data_rows / (config.beta * config.t_c * plan.total_bandwidth)


def to_antipodal(bits: Sequence[int] | np.ndarray) -> np.ndarray:
    """Map {0, 1} to {-1, +1}; values already in {-1, +1} pass through."""
    arr = np.asarray(bits, dtype=int)
    if np.isin(arr, (0, 1)).all():
        return 2 * arr - 1
    if np.isin(arr, (-1, 1)).all():
        return arr
    raise DomainError("bits must be given as {0, 1} or {-1, +1}")


def _check_antipodal(bits: np.ndarray) -> np.ndarray:
    if not np.isin(bits, (-1, 1)).all():
        raise DomainError("bits must take values in {-1, +1}")
    return bits


@dataclass(frozen=True)
class FrameMatrices:
    """Reference row and (M-1) x beta data matrix of one MC-DCSK frame."""

    reference: np.ndarray
    data: np.ndarray
    bits: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.bits.size, self.reference.size):
            raise DimensionError(
                f"data matrix {self.data.shape} does not match ({self.bits.size}, {self.reference.size})"
            )
        for arr in (self.reference, self.data, self.bits):
            arr.flags.writeable = False

    @property
    def m(self) -> int:
        return self.bits.size + 1

    @property
    def beta(self) -> int:
        return self.reference.size

    @property
    def rows(self) -> np.ndarray:
        """All M rows, reference first, as the channel sees them."""
        return np.vstack([self.reference, self.data])

    @property
    def row_energies(self) -> np.ndarray:
        return np.einsum("ik,ik->i", self.rows, self.rows)


def build_mc_frame(bits, code: ChaoticSequence, m: int | None = None) -> FrameMatrices:
    """Spread M-1 bits with one shared chaotic code."""
    bits = _check_antipodal(np.asarray(bits, dtype=int).reshape(-1))
    if m is not None and bits.size != m - 1:
        raise DimensionError(f"a frame with M={m} carries {m - 1} bits, got {bits.size}")
    if bits.size < 1:
        raise DimensionError("a frame carries at least one data bit")
    reference = np.array(code.chips, dtype=float)
    data = bits[:, None] * reference[None, :]
    return FrameMatrices(reference=reference, data=data, bits=bits.copy())


def build_mc_frames(bits: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """Vectorized frames: bits (n, M-1) and codes (n, beta) -> (n, M, beta)."""
    bits = np.asarray(bits)
    codes = np.asarray(codes, dtype=float)
    if bits.ndim != 2 or codes.ndim != 2 or bits.shape[0] != codes.shape[0]:
        raise DimensionError(f"bits {bits.shape} and codes {codes.shape} do not pair up")
    frames = np.empty((bits.shape[0], bits.shape[1] + 1, codes.shape[1]))
    frames[:, 0, :] = codes
    frames[:, 1:, :] = bits[:, :, None] * codes[:, None, :]
    return frames


def build_dcsk_serial(bits, codes: Sequence[ChaoticSequence]) -> np.ndarray:
    """Serial DCSK chip stream: per bit, beta reference chips then s_i times them."""
    bits = _check_antipodal(np.asarray(bits, dtype=int).reshape(-1))
    if len(codes) != bits.size:
        raise DimensionError(f"serial DCSK needs one fresh code per bit: {bits.size} bits, {len(codes)} codes")
    if len({c.beta for c in codes}) > 1:
        raise DimensionError("all codes of a serial stream must share one spreading factor")
    chips = np.array([c.chips for c in codes], dtype=float)
    return serial_dcsk_rows(bits, chips).reshape(-1)


def serial_dcsk_rows(bits: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """Serial DCSK slots, one 2*beta row per bit: (n,) and (n, beta) -> (n, 2*beta)."""
    return np.concatenate([codes, np.asarray(bits)[:, None] * codes], axis=1)
