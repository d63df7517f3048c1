"""CSV files written and read by the CLI, the figure recipes and the API.

Every file may start with ``#``-prefixed ``key=value`` provenance lines;
the first non-comment line is the header.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import numpy as np

from mcdcsk.core.analysis import AnalyticMethod, BerPoint
from mcdcsk.core.chaosgen import EnergyHistogram
from mcdcsk.core.frame import FrameMatrices
from mcdcsk.errors import DimensionError

logger = logging.getLogger(__name__)

HISTOGRAM_HEADER = ["bin_center", "probability"]
ANALYTIC_HEADER = ["ebno_db", "ber", "method", "M", "beta", "profile_id"]
CURVE_HEADER = [
    "ebno_db", "errors", "bits", "ber", "ci_low", "ci_high", "ber_analytic",
    "method", "M", "beta", "profile_id",
]
DECISION_HEADER = ["frame", "bit_index", "decision_variable", "decision", "bit"]


def provenance(**fields) -> Dict[str, str]:
    return {k: str(v) for k, v in fields.items() if v is not None}


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence], meta: Dict[str, str] | None = None) -> Path:
    """Write a CSV file with optional provenance comments."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow(row)
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def read_rows(path) -> tuple[Dict[str, str], List[Dict[str, str]]]:
    """Return the provenance mapping and the data rows of a CSV file."""
    meta: Dict[str, str] = {}
    lines = []
    with Path(path).open(newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
            elif line.strip():
                lines.append(line)
    return meta, list(csv.DictReader(lines))


def write_histogram(path, hist: EnergyHistogram, meta: Dict[str, str] | None = None) -> Path:
    meta = {**provenance(beta=hist.beta, n_samples=hist.n_samples), **(meta or {})}
    rows = ([f"{c:.12g}", f"{p:.12g}"] for c, p in zip(hist.bin_centers, hist.probabilities))
    return write_rows(path, HISTOGRAM_HEADER, rows, meta)


def read_histogram(path) -> EnergyHistogram:
    meta, rows = read_rows(path)
    centers = np.array([float(r["bin_center"]) for r in rows])
    probs = np.array([float(r["probability"]) for r in rows])
    # renormalize the printed rounding away
    probs = probs / probs.sum()
    return EnergyHistogram(
        bin_centers=centers,
        probabilities=probs,
        beta=int(meta.get("beta", 0)),
        n_samples=int(meta.get("n_samples", 0)),
    )


def write_analytic(path, points: Sequence[BerPoint], meta: Dict[str, str] | None = None) -> Path:
    rows = (
        [f"{p.ebno_db:g}", f"{p.ber:.10e}", p.method.value, p.m, p.beta, p.profile_id]
        for p in points
    )
    return write_rows(path, ANALYTIC_HEADER, rows, meta)


def read_analytic(path) -> List[BerPoint]:
    _, rows = read_rows(path)
    return [
        BerPoint(
            ebno_db=float(r["ebno_db"]),
            ber=float(r["ber"]),
            method=AnalyticMethod(r["method"]),
            m=int(r["M"]),
            beta=int(r["beta"]),
            profile_id=r["profile_id"],
        )
        for r in rows
    ]


def write_curve(path, curve, meta: Dict[str, str] | None = None) -> Path:
    """Simulated points next to their analytic counterparts."""
    spec = curve.spec
    meta = {
        **provenance(
            spec_hash=curve.spec_hash,
            seed=spec.master_seed,
            version=curve.version,
            mode=spec.mode,
            min_bit_errors=spec.min_bit_errors,
            max_bits=spec.max_bits,
        ),
        **(meta or {}),
    }
    rows = (
        [
            f"{p.ebno_db:g}", p.errors, p.bits, f"{p.ber:.10e}", f"{p.ci_low:.10e}", f"{p.ci_high:.10e}",
            "" if p.ber_analytic is None else f"{p.ber_analytic:.10e}",
            curve.analytic_method or "", spec.config.m, spec.config.beta, curve.profile_id,
        ]
        for p in curve.points
    )
    return write_rows(path, CURVE_HEADER, rows, meta)


def write_frame(path, frame: FrameMatrices, meta: Dict[str, str] | None = None) -> Path:
    """One line per subcarrier row: role, bit and the chips."""
    header = ["row", "role", "bit"] + [f"chip_{k}" for k in range(frame.beta)]
    rows = [[0, "reference", ""] + [f"{x:.12g}" for x in frame.reference]]
    for i, (bit, chips) in enumerate(zip(frame.bits, frame.data), start=1):
        rows.append([i, "data", int(bit)] + [f"{x:.12g}" for x in chips])
    return write_rows(path, header, rows, meta)


def write_decisions(
    path,
    decision_variables: np.ndarray,
    decisions: np.ndarray,
    bits: np.ndarray,
    meta: Dict[str, str] | None = None,
) -> Path:
    """Dump decision variables of n frames, arrays shaped (n, M-1)."""
    d = np.atleast_2d(decision_variables)
    s = np.atleast_2d(decisions)
    b = np.atleast_2d(bits)
    if not d.shape == s.shape == b.shape:
        raise DimensionError(f"shapes {d.shape}, {s.shape}, {b.shape} differ")
    rows = (
        [j, i, f"{d[j, i]:.12g}", int(s[j, i]), int(b[j, i])]
        for j in range(d.shape[0])
        for i in range(d.shape[1])
    )
    return write_rows(path, DECISION_HEADER, rows, meta)
