"""
Chebyshev chaotic spreading codes.

This module provides:
1. The second-order Chebyshev polynomial map x -> 1 - 2x^2
2. Normalized chaotic codes (zero mean, unit mean square)
3. The empirical distribution of the per-bit code energy
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from mcdcsk.errors import DomainError, NumericalError

logger = logging.getLogger(__name__)

# The raw map has E[x^2] = 1/2 under its invariant density.
NORMALIZATION = math.sqrt(2.0)

# Fixed points (0.5, -1) and their preimages.
DEGENERATE_SEEDS = (0.0, 0.5, -0.5, 1.0, -1.0)

MAX_CHAINS = 4096


def cpf_next(x: float) -> float:
    """Apply one step of the Chebyshev map."""
    if abs(x) > 1.0:
        raise DomainError(f"Chebyshev map is defined on [-1, 1], got {x}")
    return 1.0 - 2.0 * x * x


def cpf_orbit(x0: float) -> Iterator[float]:
    """Yield the successive iterates of x0 (x0 itself is not yielded)."""
    if abs(x0) > 1.0:
        raise DomainError(f"Chebyshev map is defined on [-1, 1], got {x0}")
    xn = x0
    while True:
        xn = 1.0 - 2.0 * xn * xn
        yield xn


def validate_seed(seed: float) -> float:
    seed = float(seed)
    if not -1.0 < seed < 1.0:
        raise DomainError(f"seed must lie in the open interval (-1, 1), got {seed}")
    if seed in DEGENERATE_SEEDS:
        raise DomainError(f"seed {seed} falls onto a fixed point of the Chebyshev map")
    return seed


@dataclass(frozen=True)
class ChaoticSequence:
    """One normalized chaotic code of ``beta`` chips."""

    chips: np.ndarray
    seed: float
    beta: int

    def __post_init__(self):
        chips = np.asarray(self.chips, dtype=float)
        if chips.shape != (self.beta,):
            raise DomainError(f"expected {self.beta} chips, got shape {chips.shape}")
        chips.flags.writeable = False
        object.__setattr__(self, "chips", chips)

    @property
    def energy(self) -> float:
        """Code energy sum(x_k^2) with T_c = 1."""
        return float(np.dot(self.chips, self.chips))


def generate_sequence(seed: float, beta: int) -> ChaoticSequence:
    """Generate a normalized code; chip 1 is the first iterate of ``seed``."""
    seed = validate_seed(seed)
    if beta < 1:
        raise DomainError(f"spreading factor must be >= 1, got {beta}")
    raw = np.fromiter(itertools.islice(cpf_orbit(seed), beta), dtype=float, count=beta)
    return ChaoticSequence(chips=NORMALIZATION * raw, seed=seed, beta=beta)


def draw_invariant_seeds(rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` seeds from the arcsine density left invariant by the map.

    Every iterate of such a seed is again arcsine distributed, so codes
    built from them are stationary from their first chip.
    """
    seeds = np.cos(np.pi * rng.random(n))
    bad = np.isin(seeds, DEGENERATE_SEEDS) | (np.abs(seeds) >= 1.0)
    while bad.any():
        seeds[bad] = np.cos(np.pi * rng.random(int(bad.sum())))
        bad = np.isin(seeds, DEGENERATE_SEEDS) | (np.abs(seeds) >= 1.0)
    return seeds


def generate_chip_matrix(seeds: np.ndarray, beta: int) -> np.ndarray:
    """Generate one normalized code per seed, shape (len(seeds), beta).

    Row i is bit-identical to ``generate_sequence(seeds[i], beta).chips``.
    """
    if beta < 1:
        raise DomainError(f"spreading factor must be >= 1, got {beta}")
    xn = np.array(seeds, dtype=float)
    if np.any(np.abs(xn) >= 1.0) or np.isin(xn, DEGENERATE_SEEDS).any():
        raise DomainError("seeds must lie in (-1, 1) and avoid the degenerate points")
    chips = np.empty((xn.size, beta))
    for k in range(beta):
        xn = 1.0 - 2.0 * xn * xn
        chips[:, k] = xn
    return NORMALIZATION * chips


@dataclass(frozen=True)
class EnergyHistogram:
    """Empirical distribution of the per-bit code energy E_data = sum(x_k^2)."""

    bin_centers: np.ndarray
    probabilities: np.ndarray
    beta: int
    n_samples: int
    class_count: int = field(init=False)

    def __post_init__(self):
        centers = np.asarray(self.bin_centers, dtype=float)
        probs = np.asarray(self.probabilities, dtype=float)
        if centers.ndim != 1 or centers.shape != probs.shape or centers.size == 0:
            raise DomainError("histogram needs matching, non-empty centers and probabilities")
        if np.any(probs < 0.0):
            raise DomainError("histogram probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise DomainError(f"histogram probabilities sum to {probs.sum()}, not 1")
        if np.any(np.diff(centers) <= 0.0):
            raise DomainError("histogram bin centers must be strictly increasing")
        centers.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "bin_centers", centers)
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "class_count", int(centers.size))

    @property
    def mean_energy(self) -> float:
        return float(np.dot(self.bin_centers, self.probabilities))


def sample_energies(beta: int, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n_samples`` successive block energies from independent chains.

    Each chain starts from an invariant-density seed and contributes
    consecutive blocks of ``beta`` chips; sharding changes the sample set,
    not the distribution.
    """
    n_chains = min(n_samples, MAX_CHAINS)
    blocks = math.ceil(n_samples / n_chains)
    xn = draw_invariant_seeds(rng, n_chains)

    energies = np.empty((n_chains, blocks))
    acc = np.zeros(n_chains)
    for b in range(blocks):
        acc[:] = 0.0
        for _ in range(beta):
            xn = 1.0 - 2.0 * xn * xn
            acc += xn * xn
        energies[:, b] = 2.0 * acc  # normalized chips carry twice the raw square

    if blocks > 1 and np.any(energies.var(axis=1) == 0.0):
        raise NumericalError("a chaotic trajectory collapsed onto a periodic orbit")
    return energies.reshape(-1)[:n_samples]


def estimate_energy_histogram(
    beta: int,
    n_samples: int,
    class_count: int = 100,
    rng_seed: int = 0,
) -> EnergyHistogram:
    """Estimate the distribution of E_data over ``class_count`` equal-width classes."""
    if beta < 1:
        raise DomainError(f"spreading factor must be >= 1, got {beta}")
    if class_count < 2:
        raise DomainError(f"need at least 2 classes, got {class_count}")
    if n_samples < class_count:
        raise DomainError(f"n_samples ({n_samples}) must be >= class_count ({class_count})")

    rng = np.random.default_rng(rng_seed)
    energies = sample_energies(beta, n_samples, rng)
    if energies.var() == 0.0:
        raise NumericalError("energy samples have zero variance; trajectory collapsed")

    counts, edges = np.histogram(energies, bins=class_count, range=(energies.min(), energies.max()))
    centers = 0.5 * (edges[:-1] + edges[1:])
    probabilities = counts / counts.sum()
    logger.info(
        f"Energy histogram beta={beta}: {n_samples} samples, mean={energies.mean():.4f}, "
        f"support=[{energies.min():.3f}, {energies.max():.3f}]"
    )
    return EnergyHistogram(bin_centers=centers, probabilities=probabilities, beta=beta, n_samples=n_samples)
