"""SQLAlchemy models for stored simulation runs."""

from datetime import datetime, timezone

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship

from mcdcsk.db.database import Base


def utc_now():
    """Return the current UTC time."""
    return datetime.now(timezone.utc)


class SimulationRun(Base):
    """One Monte Carlo BER curve and the RunSpec that produced it."""

    __tablename__ = "simulation_runs"

    id = Column(Integer, primary_key=True, index=True)
    spec_hash = Column(String(12), nullable=False, index=True)
    master_seed = Column(Integer, nullable=False)
    m = Column(Integer, nullable=False)
    beta = Column(Integer, nullable=False)
    profile_id = Column(String(255), nullable=False)
    mode = Column(String(20), default="mc-dcsk")
    analytic_method = Column(String(40), nullable=True)
    version = Column(String(100), nullable=False)
    spec_json = Column(Text, nullable=False)
    created_at = Column(DateTime, default=utc_now)

    points = relationship(
        "BerPointRecord",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="BerPointRecord.ebno_db",
    )


class BerPointRecord(Base):
    """A simulated point of a stored run."""

    __tablename__ = "ber_points"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("simulation_runs.id"), nullable=False)
    ebno_db = Column(Float, nullable=False)
    errors = Column(Integer, nullable=False)
    bits = Column(Integer, nullable=False)
    ber = Column(Float, nullable=False)
    ci_low = Column(Float, nullable=False)
    ci_high = Column(Float, nullable=False)
    ber_analytic = Column(Float, nullable=True)

    run = relationship("SimulationRun", back_populates="points")
