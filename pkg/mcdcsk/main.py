"""MC-DCSK Simulator - Main FastAPI Application."""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from mcdcsk import __version__
from mcdcsk.config import settings
from mcdcsk.db.database import init_run_store
from mcdcsk.errors import McdcskError, NumericalError
from mcdcsk.routers import analysis, health, simulations
from mcdcsk.utils.logging_setup import configure_logging

configure_logging()
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Lifespan context manager for startup and shutdown events."""
    # Startup
    if not init_run_store():
        logger.info("App will continue without the run store")
    yield
    # Shutdown (nothing to do currently)


# Create FastAPI application
app = FastAPI(
    title=settings.app_name,
    description=(
        "Baseband simulator and analysis service for multi-carrier differential "
        "chaos shift keying: analytic BER expressions and seeded Monte Carlo runs."
    ),
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
    lifespan=lifespan,
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.get_cors_origins(),
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(health.router)
app.include_router(analysis.router)
app.include_router(simulations.router)


@app.exception_handler(McdcskError)
async def simulator_exception_handler(request: Request, exc: McdcskError):
    status_code = 500 if isinstance(exc, NumericalError) else 400
    logger.warning(f"{type(exc).__name__} on {request.url.path}: {exc}")
    return JSONResponse(status_code=status_code, content={"detail": str(exc)})


@app.exception_handler(ValidationError)
async def validation_exception_handler(request: Request, exc: ValidationError):
    logger.warning(f"Invalid configuration on {request.url.path}: {exc}")
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    logger.error(f"Global exception: {exc}", exc_info=True)
    return JSONResponse(
        status_code=500,
        content={"detail": str(exc)},
    )


@app.get("/")
async def read_root():
    return {"name": settings.app_name, "version": __version__, "docs": "/docs"}
