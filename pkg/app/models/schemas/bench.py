from pydantic import BaseModel, Field, PositiveFloat, PositiveInt, model_validator
from typing import Optional, List
from enum import Enum

from app.models.schemas.problem import UtilitySpec
from app.models.schemas.solver import (
    Algorithm,
    CertificatePolicy,
    EmDirection,
    MdMode,
    StopReason,
)


class ReportFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    MARKDOWN = "markdown"


class InstanceSpec(BaseModel):
    """Random instance parameters; defaults are p=0.5 and b in [0.1, 0.4]."""
    n: PositiveInt
    m: PositiveInt
    p: float = Field(default=0.5, gt=0.0, lt=1.0)
    b_min: PositiveFloat = 0.1
    b_max: PositiveFloat = 0.4
    utility: UtilitySpec = Field(default_factory=UtilitySpec)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_capacity_range(self) -> "InstanceSpec":
        if self.b_min > self.b_max:
            raise ValueError("b_min must not exceed b_max")
        return self


class GridCell(BaseModel):
    n: PositiveInt
    m: PositiveInt
    eps: PositiveFloat


class MdSettings(BaseModel):
    """Per-variant mirror-descent settings; ``start_value`` is every user's initial rate."""
    enabled: bool = True
    theta0: Optional[PositiveFloat] = None
    mode: MdMode = MdMode.LOG_SHIFT
    start_value: Optional[PositiveFloat] = None
    max_iters_cap: Optional[PositiveInt] = None


class EmSettings(BaseModel):
    enabled: bool = True
    radius: Optional[PositiveFloat] = None
    M: Optional[PositiveFloat] = None
    direction: EmDirection = EmDirection.STANDARD
    certificate_policy: CertificatePolicy = CertificatePolicy.BEST_WINDOW
    max_iters: Optional[PositiveInt] = None


class BenchConfig(BaseModel):
    """Sweep definition, loaded from the ``num bench --config`` JSON file."""
    grid: List[GridCell] = Field(min_length=1)
    repetitions: PositiveInt = 1
    seed: int = Field(default=0, ge=0)
    p: float = Field(default=0.5, gt=0.0, lt=1.0)
    b_min: PositiveFloat = 0.1
    b_max: PositiveFloat = 0.4
    utility: UtilitySpec = Field(default_factory=UtilitySpec)
    md1: MdSettings = Field(default_factory=lambda: MdSettings(enabled=False))
    md2: MdSettings = Field(default_factory=MdSettings)
    em: EmSettings = Field(default_factory=EmSettings)
    format: ReportFormat = ReportFormat.MARKDOWN

    def enabled_algorithms(self) -> List[Algorithm]:
        enabled = []
        if self.md1.enabled:
            enabled.append(Algorithm.MD1)
        if self.md2.enabled:
            enabled.append(Algorithm.MD2)
        if self.em.enabled:
            enabled.append(Algorithm.EM)
        return enabled


class ResultRecord(BaseModel):
    """One solver run inside a sweep."""
    spec: InstanceSpec
    algorithm: Algorithm
    eps: float
    repetition: int = 0
    iterations: int = 0
    wall_time_ms: float = 0.0
    objective: Optional[float] = None
    utility: Optional[float] = None
    max_violation: Optional[float] = None
    stop_reason: StopReason
    error: Optional[str] = None
