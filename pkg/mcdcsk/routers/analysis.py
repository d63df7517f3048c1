"""Analysis API router: closed-form quantities and analytic BER curves."""

import logging
from typing import List

from fastapi import APIRouter, HTTPException, status

from mcdcsk.core import analysis
from mcdcsk.core.frame import frequency_plan, spreading_factor
from mcdcsk.errors import ConfigurationError, DomainError
from mcdcsk.schemas.schemas import (
    AnalyticCurveRequest,
    BerPointResponse,
    BpskResponse,
    DbrResponse,
    SpreadingFactorResponse,
    SubcarrierPlanResponse,
    SystemConfig,
)

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/analysis", tags=["analysis"])


@router.get("/dbr", response_model=DbrResponse)
def get_dbr(m: int):
    """Data-energy-to-bit-energy ratio for M subcarriers."""
    try:
        return DbrResponse(m=m, dbr=analysis.dbr(m), reference_share=analysis.reference_share(m))
    except DomainError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))


@router.get("/spreading-factor", response_model=SpreadingFactorResponse)
def get_spreading_factor(t_b: float, bandwidth: float, m: int, alpha: float = 0.25):
    """Largest spreading factor fitting M subcarriers into the band."""
    try:
        beta = spreading_factor(t_b, bandwidth, m, alpha)
    except ConfigurationError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    return SpreadingFactorResponse(t_b=t_b, bandwidth=bandwidth, m=m, alpha=alpha, beta=beta)


@router.get("/plan", response_model=SubcarrierPlanResponse)
def get_plan(m: int, beta: int = 1, alpha: float = 0.25, t_c: float = 1.0, f_p: float = 0.0):
    """Subcarrier frequencies and spacing."""
    try:
        config = SystemConfig(m=m, beta=beta, alpha=alpha, t_c=t_c)
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    plan = frequency_plan(config, f_p)
    return SubcarrierPlanResponse(
        f_p=plan.f_p,
        frequencies=plan.frequencies.tolist(),
        b_c=plan.b_c,
        delta=plan.delta,
        total_bandwidth=plan.total_bandwidth,
    )


@router.get("/bpsk", response_model=BpskResponse)
def get_bpsk(ebn0_db: float):
    """Coherent BPSK baseline."""
    return BpskResponse(ebn0_db=ebn0_db, ber=analysis.ber_bpsk_reference(ebn0_db))


@router.post("/curve", response_model=List[BerPointResponse])
def post_curve(request: AnalyticCurveRequest):
    """Evaluate an analytic BER curve; the method defaults to the automatic choice."""
    try:
        points = analysis.analytic_curve(
            request.ebn0_db,
            request.m,
            request.beta,
            request.profile,
            method=request.method,
            form=request.cross_term_form,
            histogram_samples=request.histogram_samples,
            histogram_seed=request.histogram_seed,
        )
    except DomainError as e:
        logger.warning(f"Rejected analytic curve request: {e}")
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    return [
        BerPointResponse(
            ebno_db=p.ebno_db,
            ber=p.ber,
            method=p.method.value,
            m=p.m,
            beta=p.beta,
            profile_id=p.profile_id,
        )
        for p in points
    ]
