"""Reproduction recipes: each writes the CSV series behind one BER or design plot."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from mcdcsk.config import settings
from mcdcsk.core import analysis, export, harness
from mcdcsk.core.chaosgen import estimate_energy_histogram
from mcdcsk.errors import ConfigurationError
from mcdcsk.schemas.schemas import ChannelProfile, RunSpec, SystemConfig

logger = logging.getLogger(__name__)

AWGN_GRID = [float(x) for x in range(5, 15)]
RAYLEIGH_GRID = [float(x) for x in range(10, 32, 2)]
AWGN_SYSTEMS = ((64, 5), (16, 20), (8, 40), (2, 160))
SWEEP_BETAS = (1, 2, 5, 10, 20, 50, 80, 160, 320)
ISI_TAU2 = (1, 2, 4, 8, 12, 20, 30, 40, 60, 79)
UNEQUAL_GAINS = (4 / 7, 2 / 7, 1 / 7)


class Budget:
    """Monte Carlo budget and grid overrides shared by every recipe."""

    def __init__(
        self,
        min_errors: Optional[int] = None,
        max_bits: Optional[int] = None,
        seed: int = 0,
        workers: Optional[int] = None,
        ebn0_db: Optional[Sequence[float]] = None,
        histogram_samples: Optional[int] = None,
    ):
        self.min_errors = min_errors or settings.min_bit_errors
        self.max_bits = max_bits or settings.max_bits
        self.seed = seed
        self.workers = workers or settings.workers
        self.ebn0_db = list(ebn0_db) if ebn0_db else None
        self.histogram_samples = histogram_samples or settings.histogram_samples

    def spec(self, config: SystemConfig, profile: ChannelProfile, grid: Sequence[float]) -> RunSpec:
        return RunSpec(
            config=config,
            profile=profile,
            ebn0_db=list(self.ebn0_db or grid),
            min_bit_errors=self.min_errors,
            max_bits=max(self.max_bits, self.min_errors),
            master_seed=self.seed,
            workers=self.workers,
        )


def _curve_files(out_dir: Path, stem: str, specs: List[RunSpec], budget: Budget) -> List[Path]:
    paths = []
    for spec in specs:
        histogram = None
        if analysis.choose_method(spec.profile, spec.config.beta) is analysis.AnalyticMethod.AWGN_LOW_SF:
            histogram = estimate_energy_histogram(
                spec.config.beta, budget.histogram_samples, settings.histogram_classes, rng_seed=spec.master_seed
            )
        curve = harness.run_monte_carlo(spec, analytic=True, histogram=histogram)
        name = f"{stem}_M{spec.config.m}_beta{spec.config.beta}.csv"
        paths.append(export.write_curve(out_dir / name, curve))
    return paths


def figure_dbr(out_dir: Path, budget: Budget) -> List[Path]:
    rows = ([m, f"{analysis.dbr(m):.12g}", f"{analysis.reference_share(m):.12g}"] for m in range(2, 65))
    meta = export.provenance(version=harness.version_string())
    return [export.write_rows(out_dir / "dbr.csv", ["M", "dbr", "reference_share"], rows, meta)]


def figure_energy_histogram(out_dir: Path, budget: Budget) -> List[Path]:
    paths = []
    for beta in (5, 20, 80):
        hist = estimate_energy_histogram(
            beta, budget.histogram_samples, settings.histogram_classes, rng_seed=budget.seed
        )
        meta = export.provenance(seed=budget.seed, version=harness.version_string())
        paths.append(export.write_histogram(out_dir / f"energy_histogram_beta{beta}.csv", hist, meta))
    return paths


def figure_awgn_spreading(out_dir: Path, budget: Budget) -> List[Path]:
    specs = [
        budget.spec(SystemConfig(m=m, beta=beta), ChannelProfile.awgn(), AWGN_GRID)
        for m, beta in AWGN_SYSTEMS
    ]
    return _curve_files(out_dir, "awgn_spreading", specs, budget)


def figure_subcarrier_gain(out_dir: Path, budget: Budget) -> List[Path]:
    specs = [budget.spec(SystemConfig(m=m, beta=5), ChannelProfile.awgn(), AWGN_GRID) for m in (2, 64)]
    paths = _curve_files(out_dir, "subcarrier_gain", specs, budget)
    bpsk = analysis.analytic_curve(
        budget.ebn0_db or AWGN_GRID, 2, 5, method=analysis.AnalyticMethod.BPSK_REFERENCE
    )
    paths.append(export.write_analytic(out_dir / "subcarrier_gain_bpsk.csv", bpsk))
    return paths


def figure_beta_sweep(out_dir: Path, budget: Budget) -> List[Path]:
    ebn0 = (budget.ebn0_db or [12.0])[0]
    template = budget.spec(SystemConfig(m=2, beta=SWEEP_BETAS[0]), ChannelProfile.awgn(), [ebn0])
    sweep = harness.sweep_beta(template, SWEEP_BETAS, ebn0)
    rows = []
    for beta, p in zip(sweep.betas, sweep.points):
        ga = analysis.ber_awgn_high_sf(ebn0, 2, beta)
        rows.append([beta, p.errors, p.bits, f"{p.ber:.10e}", f"{p.ci_low:.10e}", f"{p.ci_high:.10e}", f"{ga:.10e}"])
    meta = export.provenance(
        spec_hash=harness.spec_hash(template),
        seed=budget.seed,
        version=harness.version_string(),
        ebno_db=ebn0,
        argmin_beta=sweep.argmin_beta,
    )
    header = ["beta", "errors", "bits", "ber", "ci_low", "ci_high", "ber_gaussian_approx"]
    return [export.write_rows(out_dir / "beta_sweep.csv", header, rows, meta)]


def _rayleigh(out_dir: Path, budget: Budget, stem: str, profile: ChannelProfile) -> List[Path]:
    specs = [budget.spec(SystemConfig(m=m, beta=80), profile, RAYLEIGH_GRID) for m in (2, 64)]
    return _curve_files(out_dir, stem, specs, budget)


def figure_rayleigh_equal_gain(out_dir: Path, budget: Budget) -> List[Path]:
    return _rayleigh(out_dir, budget, "rayleigh_equal_gain", ChannelProfile.rayleigh((0.5, 0.5), (0, 2)))


def figure_rayleigh_unequal_gain(out_dir: Path, budget: Budget) -> List[Path]:
    return _rayleigh(out_dir, budget, "rayleigh_unequal_gain", ChannelProfile.rayleigh(UNEQUAL_GAINS, (0, 3, 6)))


def figure_isi_limit(out_dir: Path, budget: Budget) -> List[Path]:
    ebn0 = (budget.ebn0_db or [15.0])[0]
    template = budget.spec(
        SystemConfig(m=64, beta=80), ChannelProfile.rayleigh(UNEQUAL_GAINS, (0, 1, 2)), [ebn0]
    )
    sweep = harness.sweep_delay(template, ISI_TAU2, ebn0, UNEQUAL_GAINS)
    rows = [
        [
            t, t + 1, p.errors, p.bits, f"{p.ber:.10e}", f"{p.ci_low:.10e}", f"{p.ci_high:.10e}",
            f"{sweep.ber_analytic:.10e}", f"{isi:.10e}",
        ]
        for t, p, isi in zip(sweep.tau2, sweep.points, sweep.ber_isi)
    ]
    meta = export.provenance(
        spec_hash=harness.spec_hash(template), seed=budget.seed, version=harness.version_string(), ebno_db=ebn0
    )
    header = ["tau2", "tau3", "errors", "bits", "ber", "ci_low", "ci_high", "ber_analytic", "ber_isi"]
    return [export.write_rows(out_dir / "isi_limit.csv", header, rows, meta)]


RECIPES: Dict[str, Callable[[Path, Budget], List[Path]]] = {
    "dbr": figure_dbr,
    "energy-histogram": figure_energy_histogram,
    "awgn-spreading": figure_awgn_spreading,
    "subcarrier-gain": figure_subcarrier_gain,
    "beta-sweep": figure_beta_sweep,
    "rayleigh-equal-gain": figure_rayleigh_equal_gain,
    "rayleigh-unequal-gain": figure_rayleigh_unequal_gain,
    "isi-limit": figure_isi_limit,
}


def emit_figure(name: str, out_dir=None, **overrides) -> List[Path]:
    """Run one recipe and return the files it wrote."""
    if name not in RECIPES:
        raise ConfigurationError(f"unknown figure '{name}', choose from {', '.join(sorted(RECIPES))}")
    out_dir = Path(out_dir or settings.output_dir)
    budget = Budget(**overrides)
    logger.info(f"Emitting figure {name} into {out_dir}")
    return RECIPES[name](out_dir, budget)
