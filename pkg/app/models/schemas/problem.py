from pydantic import BaseModel, Field, model_validator
from typing import Optional, List
from enum import Enum


class UtilityKind(str, Enum):
    """Per-user utility families."""
    LOG = "log"
    WEIGHTED_LOG = "weighted_log"
    POWER = "power"


class UtilitySpec(BaseModel):
    """Utility family shared by all users of an instance.

    ``weighted_log`` needs one positive weight per user; ``power`` needs
    ``alpha`` in (0, 1) or (1, inf), giving u(x) = x^(1-alpha) / (1-alpha).
    """
    kind: UtilityKind = UtilityKind.LOG
    weights: Optional[List[float]] = None
    alpha: Optional[float] = None

    @model_validator(mode="after")
    def _check_parameters(self) -> "UtilitySpec":
        if self.kind == UtilityKind.WEIGHTED_LOG:
            if not self.weights:
                raise ValueError("weighted_log utility requires weights")
            if any(w <= 0 for w in self.weights):
                raise ValueError("utility weights must be strictly positive")
        if self.kind == UtilityKind.POWER:
            if self.alpha is None:
                raise ValueError("power utility requires alpha")
            if self.alpha <= 0 or self.alpha == 1:
                raise ValueError("power utility alpha must lie in (0,1) or (1,inf)")
        return self


class ProblemFile(BaseModel):
    """On-disk problem instance. Link and user indices are 0-based."""
    n: int = Field(ge=1)
    m: int = Field(ge=1)
    rows: List[List[int]]
    b: List[float]
    utility: UtilitySpec = Field(default_factory=UtilitySpec)
    seed: Optional[int] = None
