from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt
from typing import Optional, List
from enum import Enum

from app.core.config import get_settings


class Algorithm(str, Enum):
    """Solvers exposed by the CLI and the sweep."""
    MD1 = "md1"
    MD2 = "md2"
    EM = "em"


class MdMode(str, Enum):
    """Mirror-descent domain handling."""
    STANDARD = "standard"
    LOG_SHIFT = "log_shift"


class ViolatedPolicy(str, Enum):
    """Which failing row an unproductive step follows."""
    FIRST = "first"
    MOST_VIOLATED = "most_violated"


class EmDirection(str, Enum):
    """Normalization of the ellipsoid step direction.

    ``standard`` normalizes B^T g; ``paper`` normalizes B^T B^T g.
    """
    STANDARD = "standard"
    BBT = "paper"


class CertificatePolicy(str, Enum):
    """Weighting of productive ellipsoid steps in primal recovery.

    ``best_window`` averages the productive suffix with the smallest mean dual
    value and carries the accuracy guarantee. ``uniform`` averages every
    productive step, including the early far-off centers; it is a diagnostic
    only and its x_hat can violate capacities by far more than eps.
    """
    BEST_WINDOW = "best_window"
    UNIFORM = "uniform"


class StopReason(str, Enum):
    CRITERION_MET = "criterion_met"
    CAP_HIT = "cap_hit"
    NO_PRODUCTIVE_STEPS = "no_productive_steps"
    ERROR = "error"


class MdConfig(BaseModel):
    """Mirror-descent run parameters.

    ``theta0`` left unset means the problem-derived default
    sqrt(n/2) * max_j b_j; ``start`` left unset means 0 in standard mode
    and (eps*n, ..., eps*n) in log_shift mode.
    """
    eps: PositiveFloat
    theta0: Optional[PositiveFloat] = None
    mode: MdMode = MdMode.LOG_SHIFT
    start: Optional[List[float]] = None
    max_iters_cap: Optional[PositiveInt] = None
    trace_every: Optional[PositiveInt] = None
    violated_policy: ViolatedPolicy = Field(
        default_factory=lambda: ViolatedPolicy(get_settings().MD_VIOLATED_POLICY)
    )


class EmConfig(BaseModel):
    """Ellipsoid-method run parameters.

    Unset ``radius`` and ``M`` are derived from the problem (R = 10*m and
    M = ||b|| + M_g * sqrt(n) * x_max); unset ``lambda0`` puts every price
    at ``EM_LAMBDA0``.
    """
    eps: PositiveFloat
    radius: Optional[PositiveFloat] = None
    M: Optional[PositiveFloat] = None
    lambda0: Optional[List[float]] = None
    price_floor: PositiveFloat = Field(default_factory=lambda: get_settings().PRICE_FLOOR)
    max_iters: Optional[PositiveInt] = None
    direction: EmDirection = EmDirection.STANDARD
    certificate_policy: CertificatePolicy = CertificatePolicy.BEST_WINDOW


class SolveResult(BaseModel):
    """Result file written by ``num solve``."""
    algorithm: Algorithm
    eps: float
    theta0: Optional[float] = None
    mode: Optional[str] = None
    iters: int
    productive: int
    unproductive: int
    objective: float
    utility: float
    max_violation: float
    wall_time_ms: float
    stop_reason: StopReason
    solution: List[float]


class EmSolveResult(SolveResult):
    """Ellipsoid result file: the mirror-descent schema plus dual fields."""
    model_config = ConfigDict(populate_by_name=True)

    radius: float
    direction: EmDirection
    lam: List[float] = Field(alias="lambda")
    dual_value: float
    gap: float
    violation_norm: float
    certificate_support: int
