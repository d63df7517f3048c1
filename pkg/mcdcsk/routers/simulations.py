"""Simulations API router: run, store and retrieve Monte Carlo BER curves."""

import logging
from typing import List

from fastapi import APIRouter, Depends, HTTPException, status
from sqlalchemy.orm import Session

from mcdcsk.config import settings
from mcdcsk.core.harness import BerCurve, run_monte_carlo
from mcdcsk.db.database import get_db
from mcdcsk.models.models import BerPointRecord, SimulationRun
from mcdcsk.schemas.schemas import RunSpec, SimulationRunResponse, SimulationRunSummary

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/simulations", tags=["simulations"])


def store_curve(db: Session, curve: BerCurve) -> SimulationRun:
    """Persist a finished curve and its points."""
    spec = curve.spec
    run = SimulationRun(
        spec_hash=curve.spec_hash,
        master_seed=spec.master_seed,
        m=spec.config.m,
        beta=spec.config.beta,
        profile_id=curve.profile_id,
        mode=spec.mode,
        analytic_method=curve.analytic_method,
        version=curve.version,
        spec_json=spec.model_dump_json(),
    )
    run.points = [
        BerPointRecord(
            ebno_db=p.ebno_db,
            errors=p.errors,
            bits=p.bits,
            ber=p.ber,
            ci_low=p.ci_low,
            ci_high=p.ci_high,
            ber_analytic=p.ber_analytic,
        )
        for p in curve.points
    ]
    db.add(run)
    db.commit()
    db.refresh(run)
    logger.info(f"Stored run {run.id} ({run.spec_hash})")
    return run


@router.post("", response_model=SimulationRunResponse, status_code=status.HTTP_201_CREATED)
def create_simulation(spec: RunSpec, analytic: bool = True, db: Session = Depends(get_db)):
    """Run a Monte Carlo simulation and store the resulting curve.

    A request without ``max_bits`` runs on the API limit.
    """
    if "max_bits" not in spec.model_fields_set:
        spec = RunSpec(**{**spec.model_dump(), "max_bits": settings.api_max_bits})
    if spec.max_bits > settings.api_max_bits:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"max_bits={spec.max_bits} exceeds the API limit of {settings.api_max_bits}",
        )
    curve = run_monte_carlo(spec, analytic=analytic)
    return store_curve(db, curve)


@router.get("", response_model=List[SimulationRunSummary])
def get_simulations(skip: int = 0, limit: int = 100, db: Session = Depends(get_db)):
    """List stored runs, newest first."""
    return db.query(SimulationRun).order_by(SimulationRun.id.desc()).offset(skip).limit(limit).all()


@router.get("/{run_id}", response_model=SimulationRunResponse)
def get_simulation(run_id: int, db: Session = Depends(get_db)):
    """Get a stored run with its points."""
    run = db.query(SimulationRun).filter(SimulationRun.id == run_id).first()
    if not run:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Simulation run with id {run_id} not found",
        )
    return run


@router.delete("/{run_id}", status_code=status.HTTP_204_NO_CONTENT)
def delete_simulation(run_id: int, db: Session = Depends(get_db)):
    """Delete a stored run and its points."""
    run = db.query(SimulationRun).filter(SimulationRun.id == run_id).first()
    if not run:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Simulation run with id {run_id} not found",
        )
    db.delete(run)
    db.commit()
    return None
