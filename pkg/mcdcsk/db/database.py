"""SQLAlchemy engine and sessions of the simulation run store."""

import logging

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import declarative_base, sessionmaker
from sqlalchemy.pool import StaticPool

from mcdcsk.config import settings

logger = logging.getLogger(__name__)


def engine_options(url: str) -> dict:
    """Connection options for a store URL.

    SQLite connections are shared with the worker threads of the API; an
    in-memory store keeps a single connection so every session sees it.
    """
    if not url.startswith("sqlite"):
        return {"pool_pre_ping": True}
    options = {"connect_args": {"check_same_thread": False}}
    if url in ("sqlite://", "sqlite:///:memory:"):
        options["poolclass"] = StaticPool
    return options


_url = settings.get_database_url()
engine = create_engine(_url, echo=settings.debug, **engine_options(_url))

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base = declarative_base()


def init_run_store(bind: Engine = engine) -> bool:
    """Create the run store tables; False when the database is unreachable."""
    from mcdcsk.models import models  # noqa: F401  registers the tables

    try:
        Base.metadata.create_all(bind=bind)
    except SQLAlchemyError as e:
        logger.error(f"Failed to create run store tables on {bind.url.render_as_string(hide_password=True)}: {e}")
        return False
    logger.info(f"Run store ready: {', '.join(sorted(Base.metadata.tables))}")
    return True


def get_db():
    """Dependency that provides a database session."""
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
