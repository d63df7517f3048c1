"""
Closed-form and numerically integrated BER expressions.

This module provides:
1. Energy bookkeeping (DBR, bit energy) and the conditional BER given gamma_b
2. SNR densities for equal-gain and dissimilar Rayleigh paths
3. BER under multipath Rayleigh fading, the AWGN Gaussian approximation
   and the low spreading factor energy-histogram sum
4. Analytic curves with automatic method selection
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid
from scipy.special import erfc

from mcdcsk.config import settings
from mcdcsk.core.channel import draw_fading_batch
from mcdcsk.core.chaosgen import EnergyHistogram, estimate_energy_histogram
from mcdcsk.errors import DomainError, NumericalError
from mcdcsk.schemas.schemas import ChannelProfile, FadingLaw

logger = logging.getLogger(__name__)

# Relative spacing below which two path SNRs are treated as equal.
GAIN_TOLERANCE = 1e-9


class CrossTermForm(str, Enum):
    """Weight of the signal x noise term in the decision variance."""

    CHIP_LEVEL = "chip-level"
    HALVED = "halved"

    @property
    def weight(self) -> float:
        return 1.0 if self is CrossTermForm.CHIP_LEVEL else 0.5


def _form(form) -> CrossTermForm:
    if form is None:
        return CrossTermForm(settings.cross_term_form)
    return CrossTermForm(form)


def db_to_linear(ebn0_db):
    """10^(dB/10); -inf maps to 0."""
    return np.power(10.0, np.asarray(ebn0_db, dtype=float) / 10.0)


# Energy bookkeeping
def dbr(m: int) -> float:
    """Share of the bit energy spent on data subcarriers, (M-1)/M."""
    if m < 2:
        raise DomainError(f"MC-DCSK needs M >= 2, got {m}")
    return (m - 1) / m


def reference_share(m: int) -> float:
    return 1.0 - dbr(m)


def bit_energy(m: int, e_data: float) -> float:
    """E_b = M/(M-1) * E_data: each bit also pays its share of the reference."""
    if m < 2:
        raise DomainError(f"MC-DCSK needs M >= 2, got {m}")
    return m / (m - 1) * e_data


def decision_moments(
    m: int,
    beta: int,
    energy: float,
    power: float,
    n0: float,
    form=CrossTermForm.CHIP_LEVEL,
) -> tuple[float, float]:
    """Mean and variance of D for s = +1 given the code energy and sum(lambda^2)."""
    useful = power * energy
    variance = _form(form).weight * useful * n0 + beta * n0 * n0 / 4.0
    return useful, variance


# Conditional BER
def _bracket(gamma: np.ndarray, m: int, beta: int, form: CrossTermForm) -> np.ndarray:
    ratio = m / (m - 1)
    return 2.0 * form.weight * ratio / gamma + ratio * ratio * beta / (2.0 * gamma * gamma)


def ber_conditional(gamma_b, m: int, beta: int, form=None):
    """BER given the instantaneous SNR per bit; vectorized over ``gamma_b``."""
    if m < 2 or beta < 1:
        raise DomainError(f"invalid system M={m}, beta={beta}")
    gamma = np.asarray(gamma_b, dtype=float)
    if np.any(~(gamma > 0.0)):
        raise DomainError("gamma_b must be strictly positive")
    with np.errstate(divide="ignore", over="ignore"):
        ber = 0.5 * erfc(_bracket(gamma, m, beta, _form(form)) ** -0.5)
    return float(ber) if ber.ndim == 0 else ber


def ber_bpsk_reference(ebn0_db):
    """Coherent BPSK, 1/2 erfc(sqrt(Eb/N0))."""
    ber = 0.5 * erfc(np.sqrt(db_to_linear(ebn0_db)))
    return float(ber) if np.ndim(ber) == 0 else ber


def ber_awgn_high_sf(ebn0_db: float, m: int, beta: int, form=None) -> float:
    """Gaussian approximation: every bit carries the mean energy."""
    gamma = float(db_to_linear(ebn0_db))
    if gamma == 0.0:
        return 0.5
    return ber_conditional(gamma, m, beta, form)


def ber_awgn_low_sf(ebn0_db: float, m: int, beta: int, hist: EnergyHistogram, form=None) -> float:
    """Average the conditional BER over the code-energy histogram.

    The mean bit energy sits at the nominal Eb/N0, so bin n contributes at
    gamma_n = Eb/N0 * E_n / mean(E); the bin probabilities are the weights.
    """
    if hist.beta != beta:
        raise DomainError(f"histogram was estimated for beta={hist.beta}, not {beta}")
    lin = float(db_to_linear(ebn0_db))
    if lin == 0.0:
        return 0.5
    gammas, weights = snr_pdf_empirical(hist, ebn0_db).grid()
    gammas = np.maximum(gammas, np.finfo(float).tiny)
    return float(np.dot(ber_conditional(gammas, m, beta, form), weights))


# SNR densities
def snr_pdf_iid(gamma_b, gamma_c: float, n_paths: int):
    """Sum of ``n_paths`` iid exponential SNRs of mean ``gamma_c`` (Erlang law)."""
    if gamma_c <= 0 or n_paths < 1:
        raise DomainError(f"need gamma_c > 0 and L >= 1, got {gamma_c}, {n_paths}")
    return stats.gamma.pdf(gamma_b, a=n_paths, scale=gamma_c)


def snr_cdf_iid(gamma_b, gamma_c: float, n_paths: int):
    if gamma_c <= 0 or n_paths < 1:
        raise DomainError(f"need gamma_c > 0 and L >= 1, got {gamma_c}, {n_paths}")
    return stats.gamma.cdf(gamma_b, a=n_paths, scale=gamma_c)


def _rho(gammas: np.ndarray) -> np.ndarray:
    gammas = np.asarray(gammas, dtype=float)
    if gammas.ndim != 1 or gammas.size == 0 or np.any(gammas <= 0.0):
        raise DomainError("path SNRs must be a non-empty list of positive values")
    diff = gammas[:, None] - gammas[None, :]
    scale = np.maximum(np.abs(gammas[:, None]), np.abs(gammas[None, :]))
    off_diag = ~np.eye(gammas.size, dtype=bool)
    if np.any(np.abs(diff[off_diag]) < GAIN_TOLERANCE * scale[off_diag]):
        raise DomainError("dissimilar paths need pairwise distinct SNRs; use the iid density")
    factors = np.where(off_diag, gammas[:, None] / np.where(off_diag, diff, 1.0), 1.0)
    return np.prod(factors, axis=1)


def snr_pdf_dissimilar(gamma_b, gammas: Sequence[float]):
    """Sum_l rho_l/g_l exp(-gamma/g_l), rho_l = prod_{j!=l} g_l/(g_l - g_j)."""
    g = np.asarray(gammas, dtype=float)
    rho = _rho(g)
    x = np.asarray(gamma_b, dtype=float)[..., None]
    pdf = np.sum(rho / g * np.exp(-x / g), axis=-1)
    return np.maximum(pdf, 0.0)


def snr_cdf_dissimilar(gamma_b, gammas: Sequence[float]):
    g = np.asarray(gammas, dtype=float)
    rho = _rho(g)
    x = np.asarray(gamma_b, dtype=float)[..., None]
    return np.clip(np.sum(rho * -np.expm1(-x / g), axis=-1), 0.0, 1.0)


class SnrPdfKind(str, Enum):
    IID_RAYLEIGH = "iid_rayleigh"
    DISSIMILAR = "dissimilar"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class SnrPdf:
    """Density of gamma_b.

    For the Rayleigh kinds ``gammas`` holds the mean SNR of every path; for
    the empirical kind ``support``/``weights`` hold the histogram mapped to
    gamma_b and the density is a set of point masses.
    """

    kind: SnrPdfKind
    gammas: tuple[float, ...] = ()
    support: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def pdf(self, gamma_b):
        if self.kind is SnrPdfKind.IID_RAYLEIGH:
            return snr_pdf_iid(gamma_b, self.gammas[0], len(self.gammas))
        if self.kind is SnrPdfKind.DISSIMILAR:
            return snr_pdf_dissimilar(gamma_b, self.gammas)
        raise DomainError("an empirical SNR law has no density; use grid()")

    def cdf(self, gamma_b):
        if self.kind is SnrPdfKind.IID_RAYLEIGH:
            return snr_cdf_iid(gamma_b, self.gammas[0], len(self.gammas))
        if self.kind is SnrPdfKind.DISSIMILAR:
            return snr_cdf_dissimilar(gamma_b, self.gammas)
        x = np.asarray(gamma_b, dtype=float)[..., None]
        return np.sum(np.where(self.support <= x, self.weights, 0.0), axis=-1)

    @property
    def mean(self) -> float:
        if self.kind is SnrPdfKind.EMPIRICAL:
            return float(np.dot(self.support, self.weights))
        return float(sum(self.gammas))

    def grid(self, nodes: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Evaluation grid (gamma_n, f(gamma_n)) used by the BER integral."""
        if self.kind is SnrPdfKind.EMPIRICAL:
            return self.support, self.weights
        nodes = nodes or settings.quadrature_nodes
        gamma = np.geomspace(self.mean * 1e-6, self.mean * 50.0, nodes)
        return gamma, self.pdf(gamma)

    def total_mass(self, nodes: int | None = None) -> float:
        gamma, f = self.grid(nodes)
        if self.kind is SnrPdfKind.EMPIRICAL:
            return float(f.sum())
        return float(trapezoid(f, gamma) + self.cdf(gamma[0]))


def snr_pdf_for_profile(profile: ChannelProfile, ebn0_db: float) -> SnrPdf:
    """Pick the gamma_b law of a Rayleigh profile at the given Eb/N0."""
    if profile.fading != FadingLaw.RAYLEIGH:
        raise DomainError("a non-fading profile has no SNR density")
    lin = float(db_to_linear(ebn0_db))
    gains = np.array([g for g in profile.gains if g > 0.0])
    if gains.size == 0 or lin <= 0.0:
        raise DomainError("the profile carries no received energy")
    gammas = tuple(float(g) for g in lin * gains)

    ref = gains.max()
    if np.all(np.abs(gains - ref) < GAIN_TOLERANCE * ref):
        return SnrPdf(kind=SnrPdfKind.IID_RAYLEIGH, gammas=gammas)
    unique = np.unique(gains)
    if unique.size == gains.size and np.all(np.diff(unique) >= GAIN_TOLERANCE * unique[1:]):
        return SnrPdf(kind=SnrPdfKind.DISSIMILAR, gammas=gammas)
    raise DomainError(
        f"path gains {profile.gains} are neither all equal nor pairwise distinct"
    )


def snr_pdf_empirical(hist: EnergyHistogram, ebn0_db: float) -> SnrPdf:
    """Energy histogram mapped to gamma_b with the mean anchored at Eb/N0."""
    lin = float(db_to_linear(ebn0_db))
    support = lin * (hist.bin_centers / hist.mean_energy)
    return SnrPdf(kind=SnrPdfKind.EMPIRICAL, support=support, weights=hist.probabilities)


def ber_rayleigh(
    ebn0_db: float,
    m: int,
    beta: int,
    profile: ChannelProfile,
    nodes: int | None = None,
    form=None,
) -> float:
    """Average the conditional BER over the gamma_b density of the profile.

    Composite trapezoid on a log-spaced grid; the mass below the first node
    is added at the first node's BER.
    """
    if profile.fading == FadingLaw.NONE:
        return ber_awgn_high_sf(ebn0_db, m, beta, form)
    if float(db_to_linear(ebn0_db)) == 0.0:
        return 0.5
    law = snr_pdf_for_profile(profile, ebn0_db)
    gamma, f = law.grid(nodes)
    conditional = ber_conditional(gamma, m, beta, form)
    ber = trapezoid(conditional * f, gamma) + conditional[0] * float(law.cdf(gamma[0]))
    if not math.isfinite(ber):
        raise NumericalError(f"BER integral diverged at {ebn0_db} dB for {profile.profile_id}")
    return float(min(max(ber, 0.0), 0.5))


def isi_keep_factors(delays, beta: int) -> np.ndarray:
    """Per-path factor 1 - 2*tau_l/beta left of the useful correlation after a bit flip."""
    tau = np.minimum(np.asarray(delays, dtype=float), float(beta))
    return 1.0 - 2.0 * tau / beta


def ber_rayleigh_isi(
    ebn0_db: float,
    m: int,
    beta: int,
    profile: ChannelProfile,
    draws: int | None = None,
    seed: int = 0,
    form=None,
) -> float:
    """Rayleigh BER of MC-DCSK with the inter-frame ISI of the delayed paths.

    For chips k < tau_l, path l carries the previous frame, whose bit on the
    same subcarrier equals the current one with probability 1/2. When it
    differs, the useful part of the correlation shrinks to
    sum_l lambda_l^2 (1 - 2 tau_l/beta) while the variance stays put. The
    conditional BER is averaged over ``draws`` seeded fading vectors and
    both cases. Delays at or above beta are clipped to one full frame.
    """
    if profile.fading != FadingLaw.RAYLEIGH:
        raise DomainError("the delay-aware integral needs a fading profile")
    if m < 2 or beta < 1:
        raise DomainError(f"invalid system M={m}, beta={beta}")
    lin = float(db_to_linear(ebn0_db))
    if lin == 0.0:
        return 0.5
    rng = np.random.default_rng(seed)
    powers = draw_fading_batch(profile, rng, draws or settings.isi_fading_draws) ** 2
    total = powers.sum(axis=1)
    if np.any(total <= 0.0):
        raise DomainError("the profile carries no received energy")
    keep = powers @ isi_keep_factors(profile.delays, beta) / total
    with np.errstate(divide="ignore", over="ignore"):
        root = _bracket(lin * total, m, beta, _form(form)) ** -0.5
    ber = float(np.mean(0.25 * (erfc(root) + erfc(keep * root))))
    if not math.isfinite(ber):
        raise NumericalError(f"delay-aware BER diverged at {ebn0_db} dB for {profile.profile_id}")
    return ber


# Curves
class AnalyticMethod(str, Enum):
    AWGN_HIGH_SF = "awgn_high_sf"
    AWGN_LOW_SF = "awgn_low_sf"
    RAYLEIGH_INTEGRAL = "rayleigh_integral"
    RAYLEIGH_ISI = "rayleigh_isi"
    MONTE_CARLO = "monte_carlo"
    BPSK_REFERENCE = "bpsk_reference"


@dataclass(frozen=True)
class BerPoint:
    ebno_db: float
    ber: float
    method: AnalyticMethod
    m: int
    beta: int
    profile_id: str


def choose_method(profile: ChannelProfile, beta: int) -> AnalyticMethod:
    if profile.fading == FadingLaw.RAYLEIGH:
        return AnalyticMethod.RAYLEIGH_INTEGRAL
    if beta <= settings.low_sf_max_beta:
        return AnalyticMethod.AWGN_LOW_SF
    return AnalyticMethod.AWGN_HIGH_SF


def analytic_curve(
    ebn0_db: Iterable[float],
    m: int,
    beta: int,
    profile: ChannelProfile | None = None,
    method: AnalyticMethod | str | None = None,
    form=None,
    histogram: EnergyHistogram | None = None,
    histogram_samples: int | None = None,
    histogram_seed: int = 0,
    nodes: int | None = None,
) -> List[BerPoint]:
    """Evaluate one analytic BER curve over an Eb/N0 grid in dB."""
    profile = profile or ChannelProfile.awgn()
    method = AnalyticMethod(method) if method is not None else choose_method(profile, beta)
    if method is AnalyticMethod.MONTE_CARLO:
        raise DomainError("monte_carlo points come from the simulation harness")
    rayleigh = (AnalyticMethod.RAYLEIGH_INTEGRAL, AnalyticMethod.RAYLEIGH_ISI)
    if method in rayleigh and profile.fading != FadingLaw.RAYLEIGH:
        raise DomainError("the Rayleigh integral needs a fading profile")

    if method is AnalyticMethod.AWGN_LOW_SF and histogram is None:
        histogram = estimate_energy_histogram(
            beta,
            histogram_samples or settings.histogram_samples,
            settings.histogram_classes,
            rng_seed=histogram_seed,
        )

    points = []
    for x in ebn0_db:
        if method is AnalyticMethod.RAYLEIGH_INTEGRAL:
            ber = ber_rayleigh(x, m, beta, profile, nodes, form)
        elif method is AnalyticMethod.RAYLEIGH_ISI:
            ber = ber_rayleigh_isi(x, m, beta, profile, form=form)
        elif method is AnalyticMethod.AWGN_LOW_SF:
            ber = ber_awgn_low_sf(x, m, beta, histogram, form)
        elif method is AnalyticMethod.BPSK_REFERENCE:
            ber = ber_bpsk_reference(x)
        else:
            ber = ber_awgn_high_sf(x, m, beta, form)
        points.append(BerPoint(float(x), float(ber), method, m, beta, profile.profile_id))
    logger.info(f"Analytic curve {method.value} M={m} beta={beta} {profile.profile_id}: {len(points)} points")
    return points
