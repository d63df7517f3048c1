"""
Seeded Monte Carlo BER simulation and parameter sweeps.

Frames are simulated in batches; batch ``b`` of grid point ``i`` draws all of
its randomness from ``SeedSequence(master_seed, spawn_key=(i, b))``, and
batch results are reduced in index order.  A curve therefore depends on the
RunSpec only, never on how many workers produced it.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import List, Optional, Sequence

import numpy as np
import scipy
from scipy import stats

from mcdcsk import __version__
from mcdcsk.core import analysis, chaosgen
from mcdcsk.core.channel import draw_fading_batch, propagate
from mcdcsk.core.frame import build_mc_frames, serial_dcsk_rows
from mcdcsk.core.receiver import demodulate_batch, demodulate_dcsk_serial
from mcdcsk.errors import ConfigurationError
from mcdcsk.schemas.schemas import ChannelProfile, RunSpec, SystemConfig

logger = logging.getLogger(__name__)


def mean_bit_energy(spec: RunSpec) -> float:
    """M/(M-1) * beta: codes have unit mean-square chips."""
    return analysis.bit_energy(spec.config.m, float(spec.config.beta))


def noise_level(spec: RunSpec, ebn0_db: float) -> float:
    """N0 placing the mean bit energy at ``ebn0_db``; 0 when the run is noiseless."""
    if spec.noiseless:
        return 0.0
    lin = float(analysis.db_to_linear(ebn0_db))
    if lin <= 0.0:
        raise ConfigurationError(f"Eb/N0 of {ebn0_db} dB leaves no signal to simulate")
    return mean_bit_energy(spec) / lin


def wilson_interval(errors: int, bits: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval of the error probability."""
    if bits <= 0:
        return 0.0, 1.0
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    p = errors / bits
    denom = 1.0 + z * z / bits
    center = (p + z * z / (2.0 * bits)) / denom
    half = z * math.sqrt(p * (1.0 - p) / bits + z * z / (4.0 * bits * bits)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def spec_hash(spec: RunSpec) -> str:
    """Short digest of everything that determines the curve (workers excluded)."""
    payload = spec.model_dump_json(exclude={"workers"})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def version_string() -> str:
    return f"mcdcsk-{__version__} numpy-{np.__version__} scipy-{scipy.__version__}"


def batch_rng(master_seed: int, point_index: int, batch_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(point_index, batch_index))
    )


def bits_per_batch(spec: RunSpec) -> int:
    if spec.mode == "dcsk-serial":
        return spec.frames_per_batch
    return spec.frames_per_batch * spec.config.data_rows


def simulate_batch(spec: RunSpec, point_index: int, batch_index: int, n0: float) -> np.ndarray:
    """Simulate one batch and return its per-bit error flags in transmission order.

    Unscored warm-up frames precede the batch so that the first scored frame
    receives a genuine ISI tail.
    """
    rng = batch_rng(spec.master_seed, point_index, batch_index)
    beta = spec.config.beta
    profile = spec.profile
    serial = spec.mode == "dcsk-serial"
    frame_chips = 2 * beta if serial else beta
    warm = math.ceil(profile.max_delay / frame_chips)
    n = warm + spec.frames_per_batch

    codes = chaosgen.generate_chip_matrix(chaosgen.draw_invariant_seeds(rng, n), beta)
    lambdas = draw_fading_batch(profile, rng, n)
    if serial:
        bits = 2 * rng.integers(0, 2, size=n) - 1
        frames = serial_dcsk_rows(bits, codes)[:, None, :]
    else:
        bits = 2 * rng.integers(0, 2, size=(n, spec.config.data_rows)) - 1
        frames = build_mc_frames(bits, codes)

    lead = np.zeros((frames.shape[1], profile.max_delay))
    received = propagate(frames, lead, lambdas, profile.delays, n0, rng)
    if serial:
        _, decisions = demodulate_dcsk_serial(received[:, 0, :], beta)
    else:
        _, decisions = demodulate_batch(received)
    return (decisions != bits)[warm:].reshape(-1)


def _batch_worker(args) -> np.ndarray:
    spec, point_index, batch_index, n0 = args
    return simulate_batch(spec, point_index, batch_index, n0)


@dataclass
class BerCurvePoint:
    ebno_db: float
    errors: int
    bits: int
    ber: float
    ci_low: float
    ci_high: float
    n0: float
    ber_analytic: Optional[float] = None


@dataclass
class BerCurve:
    spec: RunSpec
    points: List[BerCurvePoint] = field(default_factory=list)
    analytic_method: Optional[str] = None
    spec_hash: str = ""
    version: str = ""

    @property
    def profile_id(self) -> str:
        return self.spec.profile.profile_id

    @property
    def ber(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])


class _Reducer:
    """Accumulates ordered batch results and truncates at the stopping point."""

    def __init__(self, min_errors: int, max_bits: int):
        self.min_errors = min_errors
        self.max_bits = max_bits
        self.errors = 0
        self.bits = 0

    @property
    def done(self) -> bool:
        return self.errors >= self.min_errors or self.bits >= self.max_bits

    def add(self, flags: np.ndarray) -> None:
        take = min(flags.size, self.max_bits - self.bits)
        cumulative = np.cumsum(flags[:take], dtype=np.int64)
        needed = self.min_errors - self.errors
        if take and cumulative[-1] >= needed:
            take = int(np.searchsorted(cumulative, needed)) + 1
        if take:
            self.errors += int(cumulative[take - 1])
            self.bits += take


def _simulate_point(spec: RunSpec, point_index: int, n0: float, pool) -> tuple[int, int]:
    reducer = _Reducer(spec.min_bit_errors, spec.max_bits)
    window = spec.workers if pool is not None else 1
    batch = 0
    while not reducer.done:
        tasks = [(spec, point_index, b, n0) for b in range(batch, batch + window)]
        results = pool.map(_batch_worker, tasks) if pool is not None else map(_batch_worker, tasks)
        for flags in results:
            reducer.add(flags)
            if reducer.done:
                break
        batch += window
        logger.debug(f"point {point_index}: {batch} batches, {reducer.errors} errors / {reducer.bits} bits")
    return reducer.errors, reducer.bits


def run_monte_carlo(
    spec: RunSpec,
    analytic: bool = False,
    histogram: Optional[chaosgen.EnergyHistogram] = None,
    form=None,
) -> BerCurve:
    """Simulate the BER at every Eb/N0 of ``spec``; optionally attach analytic values."""
    digest = spec_hash(spec)
    curve = BerCurve(spec=spec, spec_hash=digest, version=version_string())
    noise = [noise_level(spec, x) for x in spec.ebn0_db]
    logger.info(
        f"Monte Carlo run {digest}: mode={spec.mode} M={spec.config.m} beta={spec.config.beta} "
        f"profile={spec.profile.profile_id} points={len(spec.ebn0_db)} workers={spec.workers}"
    )

    pool = Pool(processes=spec.workers) if spec.workers > 1 else None
    try:
        for i, (ebn0, n0) in enumerate(zip(spec.ebn0_db, noise)):
            errors, bits = _simulate_point(spec, i, n0, pool)
            low, high = wilson_interval(errors, bits)
            curve.points.append(
                BerCurvePoint(ebn0, errors, bits, errors / bits, low, high, n0)
            )
            logger.info(f"Eb/N0={ebn0:g} dB: {errors} errors in {bits} bits, BER={errors / bits:.3e}")
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    if analytic:
        attach_analytic(curve, histogram=histogram, form=form)
    return curve


def attach_analytic(
    curve: BerCurve,
    histogram: Optional[chaosgen.EnergyHistogram] = None,
    form=None,
) -> BerCurve:
    spec = curve.spec
    method = analysis.choose_method(spec.profile, spec.config.beta)
    points = analysis.analytic_curve(
        spec.ebn0_db,
        spec.config.m,
        spec.config.beta,
        spec.profile,
        method=method,
        form=form,
        histogram=histogram,
    )
    for sim, ref in zip(curve.points, points):
        sim.ber_analytic = ref.ber
    curve.analytic_method = method.value
    return curve


@dataclass
class BetaSweep:
    ebno_db: float
    betas: List[int]
    points: List[BerCurvePoint]

    @property
    def argmin_beta(self) -> int:
        # lowest BER, ties to the smaller beta
        return min(zip(self.betas, self.points), key=lambda bp: (bp[1].ber, bp[0]))[0]


def sweep_beta(template: RunSpec, betas: Sequence[int], ebn0_db: float) -> BetaSweep:
    """Simulated BER of two-subcarrier MC-DCSK versus the spreading factor."""
    points = []
    for beta in betas:
        config = SystemConfig(m=2, beta=int(beta), alpha=template.config.alpha)
        spec = RunSpec(**{**template.model_dump(), "config": config, "ebn0_db": [ebn0_db], "mode": "mc-dcsk"})
        points.append(run_monte_carlo(spec).points[0])
    sweep = BetaSweep(ebno_db=ebn0_db, betas=[int(b) for b in betas], points=points)
    logger.info(f"beta sweep at {ebn0_db:g} dB: argmin beta={sweep.argmin_beta}")
    return sweep


@dataclass
class DelaySweep:
    ebno_db: float
    tau2: List[int]
    points: List[BerCurvePoint]
    ber_analytic: float
    ber_isi: List[float] = field(default_factory=list)


def sweep_delay(
    template: RunSpec,
    tau2_values: Sequence[int],
    ebn0_db: float = 15.0,
    gains: Sequence[float] = (4 / 7, 2 / 7, 1 / 7),
) -> DelaySweep:
    """Simulated BER for delays (0, tau2, tau2+1).

    Each point is paired with the delay-aware value of
    :func:`analysis.ber_rayleigh_isi`; ``ber_analytic`` is the delay-free
    integral, the same for every tau2.
    """
    m, beta = template.config.m, template.config.beta
    points, isi = [], []
    analytic_ber = None
    for tau2 in tau2_values:
        profile = ChannelProfile.rayleigh(gains, (0, int(tau2), int(tau2) + 1))
        spec = RunSpec(**{**template.model_dump(), "profile": profile, "ebn0_db": [ebn0_db]})
        points.append(run_monte_carlo(spec).points[0])
        isi.append(analysis.ber_rayleigh_isi(ebn0_db, m, beta, profile))
        if analytic_ber is None:
            analytic_ber = analysis.ber_rayleigh(ebn0_db, m, beta, profile)
        logger.info(f"tau2={tau2}: simulated {points[-1].ber:.3e}, delay-aware {isi[-1]:.3e}")
    return DelaySweep(
        ebno_db=ebn0_db,
        tau2=[int(t) for t in tau2_values],
        points=points,
        ber_analytic=analytic_ber if analytic_ber is not None else float("nan"),
        ber_isi=isi,
    )
