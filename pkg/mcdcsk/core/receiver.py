"""Non-coherent matrix correlator receiver and decision-variable statistics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from mcdcsk.core import chaosgen
from mcdcsk.core.analysis import CrossTermForm, bit_energy, db_to_linear, decision_moments
from mcdcsk.core.channel import FadingDraw, propagate_isolated
from mcdcsk.core.frame import build_mc_frames
from mcdcsk.errors import ConfigurationError, DimensionError
from mcdcsk.schemas.schemas import ChannelProfile, SystemConfig

logger = logging.getLogger(__name__)

TRIAL_CHUNK = 2048


def hard_decisions(decision_variables: np.ndarray) -> np.ndarray:
    # D == 0 decodes as +1
    return np.where(decision_variables >= 0.0, 1, -1)


@dataclass(frozen=True)
class ReceiverOutput:
    decisions: np.ndarray
    decision_variables: np.ndarray
    reference_row: np.ndarray
    data_matrix: np.ndarray


def demodulate(received: np.ndarray) -> ReceiverOutput:
    """Recover M-1 bits as sign(P x S')."""
    received = np.asarray(received, dtype=float)
    if received.ndim != 2 or received.shape[0] < 2:
        raise DimensionError(f"need a reference row and at least one data row, got shape {received.shape}")
    p = received[0]
    s = received[1:]
    d = s @ p
    return ReceiverOutput(decisions=hard_decisions(d), decision_variables=d, reference_row=p, data_matrix=s)


def demodulate_batch(received: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Correlate n frames at once: (n, M, beta) -> decision variables and decisions (n, M-1)."""
    received = np.asarray(received, dtype=float)
    if received.ndim != 3 or received.shape[1] < 2:
        raise DimensionError(f"expected frames of shape (n, M>=2, beta), got {received.shape}")
    d = np.einsum("nk,nik->ni", received[:, 0, :], received[:, 1:, :])
    return d, hard_decisions(d)


def demodulate_dcsk_serial(rows: np.ndarray, beta: int) -> tuple[np.ndarray, np.ndarray]:
    """Correlate the reference and data half-slots of serial DCSK rows (n, 2*beta)."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != 2 * beta:
        raise DimensionError(f"serial DCSK rows must have 2*beta={2 * beta} chips, got {rows.shape}")
    d = np.einsum("nk,nk->n", rows[:, :beta], rows[:, beta:])
    return d, hard_decisions(d)


def decision_components(
    reference_clean: np.ndarray,
    data_clean: np.ndarray,
    reference_noise: np.ndarray,
    data_noise: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split D into the useful term, the signal x noise term W and the noise x noise term Z.

    reference_* have shape (beta,), data_* shape (M-1, beta); signal + W + Z
    equals the correlator output of the noisy rows up to rounding.
    """
    signal = data_clean @ reference_clean
    w = data_clean @ reference_noise + data_noise @ reference_clean
    z = data_noise @ reference_noise
    return signal, w, z


@dataclass(frozen=True)
class DecisionStats:
    sample_mean: float
    sample_variance: float
    expected_mean: float
    expected_variance: float
    mean_stderr: float
    variance_stderr: float
    n_samples: int
    n0: float


def decision_stats(
    config: SystemConfig,
    profile: ChannelProfile,
    draw: FadingDraw,
    ebn0_db: float,
    n_trials: int,
    rng: np.random.Generator,
    *,
    resample_code: bool = False,
    seed: float | None = None,
    cross_term_form=None,
) -> DecisionStats:
    """Monte Carlo moments of D given s = +1 next to their analytic values.

    With a fixed code every trial redraws only the noise; with
    ``resample_code`` every trial also draws a fresh code, and the expected
    moments use the mean code energy.  Frames are received in isolation,
    so only in-frame multipath terms are present.  N0 places the mean bit
    energy M/(M-1)*beta at ``ebn0_db`` (+inf gives a noiseless run); the
    profile supplies the delays only.
    """
    form = CrossTermForm(cross_term_form or CrossTermForm.CHIP_LEVEL)
    m, beta = config.m, config.beta
    lin = float(db_to_linear(ebn0_db))
    if lin <= 0.0:
        raise ConfigurationError(f"Eb/N0 of {ebn0_db} dB leaves no signal to measure")
    n0 = bit_energy(m, float(beta)) / lin
    if seed is None:
        seed = float(chaosgen.draw_invariant_seeds(rng, 1)[0])
    fixed_code = chaosgen.generate_sequence(seed, beta).chips

    samples = []
    energies = []
    remaining = n_trials
    while remaining > 0:
        n = min(remaining, TRIAL_CHUNK)
        if resample_code:
            codes = chaosgen.generate_chip_matrix(chaosgen.draw_invariant_seeds(rng, n), beta)
        else:
            codes = np.broadcast_to(fixed_code, (n, beta))
        frames = build_mc_frames(np.ones((n, m - 1), dtype=int), codes)
        lambdas = np.broadcast_to(draw.lambdas, (n, draw.lambdas.size))
        received = propagate_isolated(frames, lambdas, profile.delays, n0, rng)
        d, _ = demodulate_batch(received)
        # data rows of one frame share the reference noise; keep one per trial
        samples.append(d[:, 0])
        energies.append(np.einsum("nk,nk->n", codes, codes))
        remaining -= n

    d_all = np.concatenate(samples)
    energy = float(np.mean(np.concatenate(energies)))
    expected_mean, expected_var = decision_moments(m, beta, energy, draw.power, n0, form)
    var = float(d_all.var(ddof=1))
    n = d_all.size
    fourth = float(np.mean((d_all - d_all.mean()) ** 4))
    logger.debug(f"decision_stats M={m} beta={beta} N0={n0}: mean={d_all.mean():.4f} var={var:.4f}")
    return DecisionStats(
        sample_mean=float(d_all.mean()),
        sample_variance=var,
        expected_mean=expected_mean,
        expected_variance=expected_var,
        mean_stderr=math.sqrt(var / n),
        variance_stderr=math.sqrt(max(fourth - var * var, 0.0) / n),
        n_samples=n,
        n0=n0,
    )
