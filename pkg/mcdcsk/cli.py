"""Command-line interface: ``python -m mcdcsk <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from mcdcsk import __version__
from mcdcsk.config import settings
from mcdcsk.core import analysis, export, figures, harness
from mcdcsk.core.channel import apply_channel, draw_fading
from mcdcsk.core.chaosgen import draw_invariant_seeds, estimate_energy_histogram, generate_sequence
from mcdcsk.core.frame import build_mc_frame, frequency_plan, spectral_efficiency, to_antipodal
from mcdcsk.core.receiver import demodulate
from mcdcsk.errors import ConfigurationError, DimensionError, McdcskError
from mcdcsk.schemas.schemas import ChannelProfile, RunSpec, SystemConfig
from mcdcsk.utils.logging_setup import configure_logging

logger = logging.getLogger(__name__)


def ebn0_grid(start: float, stop: float, step: float) -> List[float]:
    if step <= 0 or stop < start:
        raise ConfigurationError(f"bad Eb/N0 grid start={start} stop={stop} step={step}")
    return [round(float(x), 10) for x in np.arange(start, stop + step / 2.0, step)]


def load_profile(path: Optional[str]) -> ChannelProfile:
    if path is None:
        return ChannelProfile.awgn()
    return ChannelProfile.model_validate_json(Path(path).read_text())


def system_config(args) -> SystemConfig:
    if args.tb is not None or args.bw is not None:
        return SystemConfig(m=args.m, beta=args.beta, t_b=args.tb, bandwidth=args.bw, alpha=args.alpha)
    if args.beta is None:
        raise ConfigurationError("give --beta or both --tb and --bw")
    return SystemConfig(m=args.m, beta=args.beta, alpha=args.alpha)


def run_spec(args) -> RunSpec:
    """RunSpec from ``--config`` JSON, with any explicit flag taking precedence."""
    if args.config:
        base = RunSpec.model_validate_json(Path(args.config).read_text()).model_dump()
    else:
        base = {
            "config": system_config(args),
            "profile": load_profile(args.profile),
            "ebn0_db": ebn0_grid(args.ebno_start, args.ebno_stop, args.ebno_step),
        }
    overrides = {
        "min_bit_errors": args.min_errors,
        "max_bits": args.max_bits,
        "workers": args.workers,
        "master_seed": args.seed,
        "mode": args.mode,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if args.noiseless:
        base["noiseless"] = True
    return RunSpec(**base)


def _add_system_flags(p: argparse.ArgumentParser, require_m: bool = True) -> None:
    p.add_argument("--m", type=int, required=require_m, default=None if require_m else 2, help="number of subcarriers M")
    p.add_argument("--beta", type=int, help="spreading factor")
    p.add_argument("--tb", type=float, help="bit duration, derives beta with --bw")
    p.add_argument("--bw", type=float, help="total bandwidth, derives beta with --tb")
    p.add_argument("--alpha", type=float, default=0.25, help="roll-off factor. Default=0.25")


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ebno-start", type=float, default=0.0)
    p.add_argument("--ebno-stop", type=float, default=14.0)
    p.add_argument("--ebno-step", type=float, default=1.0)
    p.add_argument("--profile", type=str, metavar="FILENAME", help="channel profile JSON. Default=AWGN")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcdcsk", description="MC-DCSK baseband simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo BER curve")
    p.add_argument("--config", type=str, metavar="FILENAME", help="RunSpec JSON")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--beta", type=int)
    p.add_argument("--tb", type=float)
    p.add_argument("--bw", type=float)
    p.add_argument("--alpha", type=float, default=0.25)
    _add_grid_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--min-errors", type=int)
    p.add_argument("--max-bits", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--mode", choices=["mc-dcsk", "dcsk-serial"])
    p.add_argument("--noiseless", action="store_true", help="force N0=0")
    p.add_argument("--no-analytic", action="store_true", help="skip the analytic companion curve")
    p.add_argument("--cross-term", choices=[f.value for f in analysis.CrossTermForm])
    p.add_argument("--store", action="store_true", help="save the curve in the run store")
    p.add_argument("--out", type=str, metavar="CSV")

    p = sub.add_parser("analyze", help="analytic BER curve")
    _add_system_flags(p)
    _add_grid_flags(p)
    p.add_argument("--method", choices=[m.value for m in analysis.AnalyticMethod if m is not analysis.AnalyticMethod.MONTE_CARLO])
    p.add_argument("--cross-term", choices=[f.value for f in analysis.CrossTermForm])
    p.add_argument("--samples", type=int, help="energy histogram samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, metavar="CSV")

    p = sub.add_parser("energy-hist", help="code energy histogram")
    p.add_argument("--beta", type=int, required=True)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, metavar="CSV")

    p = sub.add_parser("dbr", help="data-energy-to-bit-energy ratio")
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("plan", help="spreading factor and subcarrier plan")
    _add_system_flags(p)
    p.add_argument("--tc", type=float, default=1.0, help="chip duration")
    p.add_argument("--fp", type=float, default=0.0, help="lowest carrier offset")

    p = sub.add_parser("loopback", help="send a few frames and dump the frame and decision variables")
    _add_system_flags(p)
    p.add_argument("--profile", type=str, metavar="FILENAME", help="channel profile JSON. Default=AWGN")
    p.add_argument("--ebno", type=float, default=10.0, help="Eb/N0 in dB. Default=10")
    p.add_argument("--noiseless", action="store_true", help="force N0=0")
    p.add_argument("--frames", type=int, default=10)
    p.add_argument("--bits", type=str, help="M-1 bits as 0/1 digits, repeated in every frame")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frame-out", type=str, metavar="CSV", help="dump of the first frame")
    p.add_argument("--out", type=str, metavar="CSV", help="decision variables of every frame")

    p = sub.add_parser("figure", help="reproduce the data of one plot")
    p.add_argument("name", choices=sorted(figures.RECIPES))
    p.add_argument("--out-dir", type=str, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-errors", type=int)
    p.add_argument("--max-bits", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--ebno", type=str, help="comma-separated Eb/N0 list in dB")
    p.add_argument("--samples", type=int, help="energy histogram samples")

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def cmd_simulate(args) -> int:
    spec = run_spec(args)
    curve = harness.run_monte_carlo(spec, analytic=not args.no_analytic, form=args.cross_term)
    print(f"# spec_hash={curve.spec_hash} seed={spec.master_seed} {curve.version}")
    print("ebno_db  errors       bits        ber      ci_low     ci_high   analytic")
    for p in curve.points:
        ref = "" if p.ber_analytic is None else f"{p.ber_analytic:.3e}"
        print(f"{p.ebno_db:7g} {p.errors:7d} {p.bits:10d} {p.ber:.3e} {p.ci_low:.3e} {p.ci_high:.3e} {ref:>10}")
    if args.out:
        export.write_curve(args.out, curve)
    if args.store:
        from mcdcsk.db.database import Base, SessionLocal, engine
        from mcdcsk.routers.simulations import store_curve

        Base.metadata.create_all(bind=engine)
        db = SessionLocal()
        try:
            run = store_curve(db, curve)
            print(f"stored as run {run.id}")
        finally:
            db.close()
    return 0


def cmd_analyze(args) -> int:
    config = system_config(args)
    points = analysis.analytic_curve(
        ebn0_grid(args.ebno_start, args.ebno_stop, args.ebno_step),
        config.m,
        config.beta,
        load_profile(args.profile),
        method=args.method,
        form=args.cross_term,
        histogram_samples=args.samples,
        histogram_seed=args.seed,
    )
    for p in points:
        print(f"{p.ebno_db:7g} {p.ber:.6e} {p.method.value}")
    if args.out:
        export.write_analytic(args.out, points, export.provenance(version=harness.version_string()))
    return 0


def cmd_energy_hist(args) -> int:
    hist = estimate_energy_histogram(
        args.beta,
        args.samples or settings.histogram_samples,
        args.classes or settings.histogram_classes,
        rng_seed=args.seed,
    )
    print(f"beta={hist.beta} classes={hist.class_count} mean energy={hist.mean_energy:.6f}")
    if args.out:
        export.write_histogram(args.out, hist, export.provenance(seed=args.seed, version=harness.version_string()))
    return 0


def cmd_dbr(args) -> int:
    print(f"M={args.m} DBR={analysis.dbr(args.m):.6f} reference share={analysis.reference_share(args.m):.6f}")
    return 0


def cmd_plan(args) -> int:
    config = SystemConfig(**{**system_config(args).model_dump(), "t_c": args.tc})
    plan = frequency_plan(config, args.fp)
    print(f"M={config.m} beta={config.beta} alpha={config.alpha}")
    print(f"B_c=Delta={plan.b_c:g} total bandwidth={plan.total_bandwidth:g}")
    print(f"spectral efficiency={spectral_efficiency(config):.6f}")
    print("frequencies: " + ", ".join(f"{f:g}" for f in plan.frequencies))
    return 0


def cmd_loopback(args) -> int:
    """Frame-by-frame transmission with the ISI tail carried between frames."""
    config = system_config(args)
    m, beta = config.m, config.beta
    if args.frames < 1:
        raise ConfigurationError("--frames must be at least 1")
    fixed_bits = None
    if args.bits:
        if not set(args.bits) <= {"0", "1"}:
            raise ConfigurationError(f"--bits takes 0/1 digits, got '{args.bits}'")
        fixed_bits = to_antipodal([int(c) for c in args.bits])
        if fixed_bits.size != m - 1:
            raise DimensionError(f"--bits needs M-1={m - 1} digits, got {fixed_bits.size}")

    lin = float(analysis.db_to_linear(args.ebno))
    if lin <= 0.0 and not args.noiseless:
        raise ConfigurationError(f"Eb/N0 of {args.ebno} dB leaves no signal to send")
    n0 = 0.0 if args.noiseless else analysis.bit_energy(m, float(beta)) / lin
    profile = load_profile(args.profile).with_n0(n0)
    rng = np.random.default_rng(args.seed)

    tail = np.zeros((m, profile.max_delay))
    first_frame = None
    variables, decisions, sent = [], [], []
    for _ in range(args.frames):
        code = generate_sequence(float(draw_invariant_seeds(rng, 1)[0]), beta)
        bits = fixed_bits if fixed_bits is not None else to_antipodal(rng.integers(0, 2, size=m - 1))
        frame = build_mc_frame(bits, code, m)
        received = apply_channel(frame.rows, tail, draw_fading(profile, rng), profile, rng)
        if profile.max_delay:
            tail = np.concatenate([tail, frame.rows], axis=1)[:, -profile.max_delay:]
        out = demodulate(received)
        if first_frame is None:
            first_frame = frame
        variables.append(out.decision_variables)
        decisions.append(out.decisions)
        sent.append(frame.bits)

    errors = int(np.count_nonzero(np.array(decisions) != np.array(sent)))
    print(f"{args.frames} frames, {args.frames * (m - 1)} bits, {errors} errors (N0={n0:g})")
    meta = export.provenance(seed=args.seed, ebno_db=args.ebno, n0=n0, profile_id=profile.profile_id)
    if args.frame_out:
        export.write_frame(args.frame_out, first_frame, meta)
    if args.out:
        export.write_decisions(args.out, np.array(variables), np.array(decisions), np.array(sent), meta)
    return 0


def cmd_figure(args) -> int:
    grid = [float(x) for x in args.ebno.split(",")] if args.ebno else None
    paths = figures.emit_figure(
        args.name,
        args.out_dir,
        min_errors=args.min_errors,
        max_bits=args.max_bits,
        seed=args.seed,
        workers=args.workers,
        ebn0_db=grid,
        histogram_samples=args.samples,
    )
    for path in paths:
        print(path)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("mcdcsk.main:app", host=args.host, port=args.port)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "energy-hist": cmd_energy_hist,
    "dbr": cmd_dbr,
    "plan": cmd_plan,
    "loopback": cmd_loopback,
    "figure": cmd_figure,
    "serve": cmd_serve,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        logger.warning(f"Invalid configuration: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    except McdcskError as e:
        logger.warning(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
