"""Tests for the Monte Carlo harness and the parameter sweeps."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from mcdcsk.core import analysis, harness
from mcdcsk.core.chaosgen import estimate_energy_histogram
from mcdcsk.schemas.schemas import ChannelProfile, RunSpec, SystemConfig

UNEQUAL = (4 / 7, 2 / 7, 1 / 7)


def make_spec(m=2, beta=10, ebn0=(4.0,), profile=None, **kwargs):
    params = dict(min_bit_errors=100, max_bits=200_000, frames_per_batch=64, master_seed=1)
    params.update(kwargs)
    return RunSpec(
        config=SystemConfig(m=m, beta=beta),
        profile=profile or ChannelProfile.awgn(),
        ebn0_db=list(ebn0),
        **params,
    )


def log_gap(sim: float, ref: float) -> float:
    return abs(math.log10(sim) - math.log10(ref))


class TestHelpers:
    """Tests for noise levels, intervals and provenance."""

    def test_noise_level_from_mean_bit_energy(self):
        spec = make_spec(m=64, beta=5)
        assert harness.noise_level(spec, 10.0) == pytest.approx(64 / 63 * 5 / 10)

    def test_noiseless_forces_zero(self):
        assert harness.noise_level(make_spec(noiseless=True), 10.0) == 0.0

    def test_wilson_interval(self):
        low, high = harness.wilson_interval(50, 1000)
        assert low < 0.05 < high
        assert harness.wilson_interval(0, 100)[0] == 0.0
        assert harness.wilson_interval(0, 0) == (0.0, 1.0)

    def test_spec_hash_ignores_workers(self):
        a = harness.spec_hash(make_spec(workers=1))
        assert a == harness.spec_hash(make_spec(workers=4))
        assert a != harness.spec_hash(make_spec(master_seed=2))
        assert len(a) == 12

    def test_version_string(self):
        assert harness.version_string().startswith("mcdcsk-")

    def test_batch_size(self):
        spec = make_spec(m=8, beta=4, frames_per_batch=32)
        assert harness.simulate_batch(spec, 0, 0, 1.0).shape == (32 * 7,)
        serial = make_spec(m=2, beta=4, frames_per_batch=32, mode="dcsk-serial")
        assert harness.simulate_batch(serial, 0, 0, 1.0).shape == (32,)

    def test_batch_is_reproducible(self):
        spec = make_spec(m=4, beta=8)
        assert np.array_equal(harness.simulate_batch(spec, 2, 5, 1.0), harness.simulate_batch(spec, 2, 5, 1.0))


class TestRunMonteCarlo:
    """Tests for the seeded BER runs."""

    def test_noiseless_loopback(self):
        spec = make_spec(m=4, beta=8, noiseless=True, min_bit_errors=1, max_bits=300_000, frames_per_batch=4096)
        point = harness.run_monte_carlo(spec).points[0]
        assert point.errors == 0
        assert point.bits == 300_000

    def test_noiseless_serial_loopback(self):
        spec = make_spec(m=2, beta=8, noiseless=True, mode="dcsk-serial", min_bit_errors=1, max_bits=20_000)
        point = harness.run_monte_carlo(spec).points[0]
        assert point.errors == 0

    def test_stopping_rule(self):
        spec = make_spec(ebn0=(0.0, 4.0, 20.0), min_bit_errors=150, max_bits=50_000)
        curve = harness.run_monte_carlo(spec)
        for p in curve.points:
            assert p.errors == spec.min_bit_errors or p.bits == spec.max_bits
            assert p.ber == p.errors / p.bits
            assert p.ci_low <= p.ber <= p.ci_high
        assert curve.points[-1].bits == spec.max_bits

    def test_deterministic_across_workers(self):
        single = harness.run_monte_carlo(make_spec(ebn0=(2.0, 6.0), workers=1))
        pooled = harness.run_monte_carlo(make_spec(ebn0=(2.0, 6.0), workers=3))
        assert [(p.errors, p.bits) for p in single.points] == [(p.errors, p.bits) for p in pooled.points]
        assert single.spec_hash == pooled.spec_hash

    def test_attached_analytic(self):
        curve = harness.run_monte_carlo(make_spec(m=4, beta=40), analytic=True)
        assert curve.analytic_method == "awgn_high_sf"
        assert curve.points[0].ber_analytic == analysis.ber_awgn_high_sf(4.0, 4, 40)

    @pytest.mark.parametrize("m,beta,ebn0", [(16, 20, 8.0), (8, 40, 8.0), (64, 5, 8.0)])
    def test_awgn_agreement(self, m, beta, ebn0):
        spec = make_spec(m=m, beta=beta, ebn0=(ebn0,), min_bit_errors=400, max_bits=2_000_000, frames_per_batch=256)
        hist = estimate_energy_histogram(beta, 200_000, 100, rng_seed=4)
        point = harness.run_monte_carlo(spec).points[0]
        assert point.errors >= 100
        assert log_gap(point.ber, analysis.ber_awgn_low_sf(ebn0, m, beta, hist)) < 0.15

    def test_serial_mode_matches_two_subcarriers(self):
        spec = make_spec(m=2, beta=40, ebn0=(6.0,), mode="dcsk-serial", min_bit_errors=400)
        point = harness.run_monte_carlo(spec).points[0]
        assert log_gap(point.ber, analysis.ber_awgn_high_sf(6.0, 2, 40)) < 0.15

    def test_more_subcarriers_help(self):
        two = harness.run_monte_carlo(make_spec(m=2, beta=5, ebn0=(12.0,), max_bits=2_000_000)).points[0]
        many = harness.run_monte_carlo(
            make_spec(m=64, beta=5, ebn0=(12.0,), max_bits=2_000_000, frames_per_batch=256)
        ).points[0]
        assert many.ci_high < two.ci_low
        bpsk = analysis.ber_bpsk_reference(12.0)
        assert many.ber > bpsk and two.ber > bpsk

    @pytest.mark.parametrize("m", [2, 64])
    def test_rayleigh_agreement(self, m):
        profile = ChannelProfile.rayleigh((0.5, 0.5), (0, 2))
        spec = make_spec(m=m, beta=80, ebn0=(10.0,), profile=profile, min_bit_errors=2000,
                         max_bits=2_000_000, frames_per_batch=128)
        point = harness.run_monte_carlo(spec).points[0]
        assert log_gap(point.ber, analysis.ber_rayleigh(10.0, m, 80, profile)) < 0.2

    @pytest.mark.parametrize("m", [2, 64])
    @pytest.mark.parametrize("ebn0", [10.0, 20.0])
    def test_three_path_rayleigh_agreement(self, m, ebn0):
        profile = ChannelProfile.rayleigh(UNEQUAL, (0, 3, 6))
        spec = make_spec(m=m, beta=80, ebn0=(ebn0,), profile=profile, min_bit_errors=4000,
                         max_bits=8_000_000, frames_per_batch=1024, master_seed=5)
        point = harness.run_monte_carlo(spec).points[0]
        assert log_gap(point.ber, analysis.ber_rayleigh(ebn0, m, 80, profile)) < 0.2


class TestSweeps:
    """Tests for the spreading-factor and delay sweeps."""

    def test_beta_sweep(self):
        template = make_spec(m=2, beta=1, ebn0=(12.0,), min_bit_errors=300, max_bits=2_000_000, frames_per_batch=512)
        sweep = harness.sweep_beta(template, (1, 5, 10, 20, 160), 12.0)
        assert 5 <= sweep.argmin_beta <= 50
        by_beta = dict(zip(sweep.betas, sweep.points))
        assert by_beta[160].ber > by_beta[20].ber

    def test_delay_sweep(self):
        template = make_spec(
            m=64, beta=80, ebn0=(15.0,), profile=ChannelProfile.rayleigh(UNEQUAL, (0, 3, 6)),
            min_bit_errors=2000, max_bits=4_000_000, frames_per_batch=128,
        )
        sweep = harness.sweep_delay(template, (2, 12, 40), 15.0, UNEQUAL)
        short, mid, long = sweep.points
        assert short.ber == pytest.approx(sweep.ber_analytic, rel=0.25)
        assert long.ber > 1.5 * sweep.ber_analytic
        assert long.ber > mid.ber > short.ber
        # at twelve chips the previous frame's bit already costs more than 15%
        assert mid.ber > 1.15 * sweep.ber_analytic
        assert short.ber == pytest.approx(sweep.ber_isi[0], rel=0.25)
        assert mid.ber == pytest.approx(sweep.ber_isi[1], rel=0.25)

    def test_zero_delay_is_invalid(self):
        template = make_spec(m=64, beta=80, ebn0=(15.0,))
        with pytest.raises(ValidationError):
            harness.sweep_delay(template, (0,), 15.0, UNEQUAL)


class TestRunSpecValidation:
    """Tests for RunSpec invariants."""

    def test_unsorted_grid(self):
        with pytest.raises(ValidationError):
            make_spec(ebn0=(5.0, 4.0))

    def test_budget_order(self):
        with pytest.raises(ValidationError):
            make_spec(min_bit_errors=100, max_bits=10)

    def test_serial_needs_two_subcarriers(self):
        with pytest.raises(ValidationError):
            make_spec(m=4, mode="dcsk-serial")
