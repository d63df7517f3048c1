"""Tests for the plot reproduction recipes, run on tiny budgets."""

import pytest

from mcdcsk.core import export, figures
from mcdcsk.errors import ConfigurationError


def test_dbr_table(tmp_path):
    (path,) = figures.emit_figure("dbr", tmp_path)
    meta, rows = export.read_rows(path)
    assert path.name == "dbr.csv"
    assert len(rows) == 63
    assert float(rows[0]["dbr"]) == pytest.approx(0.5)
    assert float(rows[-1]["dbr"]) == pytest.approx(63 / 64)
    assert "version" in meta


def test_unknown_figure(tmp_path):
    with pytest.raises(ConfigurationError):
        figures.emit_figure("constellation", tmp_path)


def test_energy_histograms(tmp_path):
    paths = figures.emit_figure("energy-histogram", tmp_path, histogram_samples=2000, seed=3)
    assert sorted(p.name for p in paths) == [
        "energy_histogram_beta20.csv",
        "energy_histogram_beta5.csv",
        "energy_histogram_beta80.csv",
    ]
    hist = export.read_histogram(paths[0])
    assert hist.beta == 5
    assert hist.mean_energy == pytest.approx(5.0, rel=0.05)


def test_awgn_spreading_small_budget(tmp_path):
    paths = figures.emit_figure(
        "awgn-spreading", tmp_path, min_errors=5, max_bits=2000, ebn0_db=[10.0], histogram_samples=2000
    )
    assert [p.name for p in paths] == [
        "awgn_spreading_M64_beta5.csv",
        "awgn_spreading_M16_beta20.csv",
        "awgn_spreading_M8_beta40.csv",
        "awgn_spreading_M2_beta160.csv",
    ]
    _, rows = export.read_rows(paths[0])
    assert rows[0]["method"] == "awgn_low_sf"
    assert int(rows[0]["errors"]) == 5 or int(rows[0]["bits"]) == 2000


def test_subcarrier_gain_adds_bpsk(tmp_path):
    paths = figures.emit_figure(
        "subcarrier-gain", tmp_path, min_errors=5, max_bits=2000, ebn0_db=[6.0], histogram_samples=2000
    )
    assert paths[-1].name == "subcarrier_gain_bpsk.csv"
    bpsk = export.read_analytic(paths[-1])
    assert bpsk[0].method.value == "bpsk_reference"
