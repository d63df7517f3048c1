"""Health check API router: service, numeric stack and run store status."""

import logging

from fastapi import APIRouter, Depends
from sqlalchemy import func
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session

from mcdcsk import __version__
from mcdcsk.core.harness import version_string
from mcdcsk.db.database import get_db
from mcdcsk.models.models import SimulationRun
from mcdcsk.schemas.schemas import HealthResponse

logger = logging.getLogger(__name__)

router = APIRouter(tags=["health"])


@router.get("/health", response_model=HealthResponse)
def health_check(db: Session = Depends(get_db)):
    """Report the package and numeric library versions and the stored run count.

    The run store counts as unhealthy when its tables cannot be queried;
    the simulator itself keeps serving analytic requests.
    """
    try:
        stored_runs = db.query(func.count(SimulationRun.id)).scalar()
        db_status = "healthy"
    except SQLAlchemyError as e:
        logger.warning(f"Run store check failed: {e}")
        stored_runs = None
        db_status = "unhealthy"

    return HealthResponse(
        status="healthy",
        version=__version__,
        numerics=version_string(),
        database=db_status,
        stored_runs=stored_runs,
    )
