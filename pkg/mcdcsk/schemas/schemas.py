"""Pydantic schemas for simulation configuration and API request/response validation."""

from datetime import datetime
from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mcdcsk.config import settings


class FadingLaw(str, Enum):
    """Amplitude law of the channel taps."""

    NONE = "none"
    RAYLEIGH = "rayleigh"


# System configuration
class SystemConfig(BaseModel):
    """MC-DCSK system parameters.

    Either ``beta`` is given directly or it is derived from the bit
    duration ``t_b`` and the total bandwidth through the spreading-factor
    relation beta = floor(T_b * B / (M * (1 + alpha))).
    """

    m: int = Field(..., ge=2, description="Number of subcarriers M")
    beta: Optional[int] = Field(None, ge=1, description="Spreading factor")
    alpha: float = Field(0.25, ge=0.0, le=1.0, description="Roll-off factor")
    t_b: Optional[float] = Field(None, gt=0, description="Bit duration")
    bandwidth: Optional[float] = Field(None, gt=0, description="Total bandwidth B")
    t_c: float = Field(1.0, gt=0, description="Chip duration")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="before")
    @classmethod
    def derive_beta(cls, data):
        if not isinstance(data, dict) or "m" not in data:
            return data
        t_b, bandwidth = data.get("t_b"), data.get("bandwidth")
        if t_b is None or bandwidth is None:
            if data.get("beta") is None:
                raise ValueError("either beta or both t_b and bandwidth are required")
            return data

        from mcdcsk.core.frame import spreading_factor

        derived = spreading_factor(float(t_b), float(bandwidth), int(data["m"]), float(data.get("alpha", 0.25)))
        if data.get("beta") is not None and int(data["beta"]) != derived:
            raise ValueError(f"beta={data['beta']} contradicts t_b*B/(M(1+alpha)) -> {derived}")
        return {**data, "beta": derived}

    @property
    def data_rows(self) -> int:
        return self.m - 1


# Channel profile schemas
class PathSpec(BaseModel):
    """One propagation path: average power gain E[lambda^2] and delay in chips."""

    gain: float = Field(..., ge=0.0)
    delay: int = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)


class ChannelProfile(BaseModel):
    """AWGN level plus the tapped-delay-line description of the channel."""

    fading: FadingLaw = FadingLaw.NONE
    paths: List[PathSpec] = Field(default_factory=lambda: [PathSpec(gain=1.0, delay=0)], min_length=1)
    n0: float = Field(1.0, ge=0.0, description="Noise spectral level N0 (chip noise variance N0/2)")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_paths(self):
        delays = [p.delay for p in self.paths]
        if delays[0] != 0:
            raise ValueError("the first path is the line of sight and must have delay 0")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError(f"path delays must be strictly increasing, got {delays}")
        if self.fading == FadingLaw.NONE and (len(self.paths) != 1 or self.paths[0].gain != 1.0):
            raise ValueError("a non-fading profile has exactly one path with unit gain")
        return self

    @classmethod
    def awgn(cls, n0: float = 1.0) -> "ChannelProfile":
        return cls(fading=FadingLaw.NONE, n0=n0)

    @classmethod
    def rayleigh(cls, gains, delays, n0: float = 1.0) -> "ChannelProfile":
        paths = [PathSpec(gain=float(g), delay=int(d)) for g, d in zip(gains, delays, strict=True)]
        return cls(fading=FadingLaw.RAYLEIGH, paths=paths, n0=n0)

    @property
    def gains(self) -> tuple[float, ...]:
        return tuple(p.gain for p in self.paths)

    @property
    def delays(self) -> tuple[int, ...]:
        return tuple(p.delay for p in self.paths)

    @property
    def max_delay(self) -> int:
        return self.paths[-1].delay

    @property
    def total_gain(self) -> float:
        return sum(self.gains)

    @property
    def profile_id(self) -> str:
        if self.fading == FadingLaw.NONE:
            return "awgn"
        gains = "/".join(f"{g:g}" for g in self.gains)
        delays = "/".join(str(d) for d in self.delays)
        return f"rayleigh-L{len(self.paths)}-g{gains}-d{delays}"

    def with_n0(self, n0: float) -> "ChannelProfile":
        return self.model_copy(update={"n0": n0})


# Monte Carlo run specification
class RunSpec(BaseModel):
    """Everything needed to reproduce one simulated BER curve."""

    config: SystemConfig
    profile: ChannelProfile = Field(default_factory=ChannelProfile)
    ebn0_db: List[float] = Field(..., min_length=1)
    min_bit_errors: int = Field(default_factory=lambda: settings.min_bit_errors, ge=1)
    max_bits: int = Field(default_factory=lambda: settings.max_bits, ge=1)
    master_seed: int = Field(0, ge=0)
    workers: int = Field(default_factory=lambda: settings.workers, ge=1)
    frames_per_batch: int = Field(default_factory=lambda: settings.frames_per_batch, ge=1)
    mode: Literal["mc-dcsk", "dcsk-serial"] = "mc-dcsk"
    noiseless: bool = False

    model_config = ConfigDict(frozen=True)

    @field_validator("ebn0_db")
    @classmethod
    def check_grid(cls, grid: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("the Eb/N0 grid must be sorted in increasing order")
        return grid

    @model_validator(mode="after")
    def check_budget(self):
        if self.max_bits < self.min_bit_errors:
            raise ValueError("max_bits must be at least min_bit_errors")
        if self.mode == "dcsk-serial" and self.config.m != 2:
            raise ValueError("serial DCSK carries one bit per reference, use m=2")
        return self


# Health check schemas
class HealthResponse(BaseModel):
    """Schema for health check response."""

    status: str
    version: str
    numerics: str
    database: str
    stored_runs: Optional[int] = None


# Analysis schemas
class DbrResponse(BaseModel):
    """Data-energy-to-bit-energy ratio for one subcarrier count."""

    m: int
    dbr: float
    reference_share: float


class SpreadingFactorResponse(BaseModel):
    t_b: float
    bandwidth: float
    m: int
    alpha: float
    beta: int


class SubcarrierPlanResponse(BaseModel):
    """Frequency plan of the M subcarriers."""

    f_p: float
    frequencies: List[float]
    b_c: float
    delta: float
    total_bandwidth: float


class BpskResponse(BaseModel):
    ebn0_db: float
    ber: float


class AnalyticCurveRequest(BaseModel):
    """Schema for requesting an analytic BER curve."""

    m: int = Field(..., ge=2)
    beta: int = Field(..., ge=1)
    profile: ChannelProfile = Field(default_factory=ChannelProfile)
    ebn0_db: List[float] = Field(..., min_length=1, max_length=500)
    method: Optional[Literal["awgn_high_sf", "awgn_low_sf", "rayleigh_integral", "rayleigh_isi"]] = None
    cross_term_form: Literal["chip-level", "halved"] = "chip-level"
    histogram_samples: int = Field(200_000, ge=100, le=5_000_000)
    histogram_seed: int = Field(0, ge=0)


class BerPointResponse(BaseModel):
    """One analytic BER point."""

    ebno_db: float
    ber: float
    method: str
    m: int
    beta: int
    profile_id: str


# Simulation run schemas
class SimulatedPointResponse(BaseModel):
    """One simulated BER point with its Wilson confidence interval."""

    ebno_db: float
    errors: int
    bits: int
    ber: float
    ci_low: float
    ci_high: float
    ber_analytic: Optional[float] = None

    model_config = ConfigDict(from_attributes=True)


class SimulationRunResponse(BaseModel):
    """Schema for a stored simulation run."""

    id: int
    spec_hash: str
    master_seed: int
    m: int
    beta: int
    profile_id: str
    mode: str
    version: str
    created_at: datetime
    points: List[SimulatedPointResponse] = []

    model_config = ConfigDict(from_attributes=True)


class SimulationRunSummary(BaseModel):
    """Schema for listing stored runs without their points."""

    id: int
    spec_hash: str
    m: int
    beta: int
    profile_id: str
    mode: str
    created_at: datetime

    model_config = ConfigDict(from_attributes=True)
