from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from app.models.schemas.solver import Algorithm, MdMode, SolveResult, StopReason


@dataclass(frozen=True)
class StepTrace:
    """One sampled iteration.

    ``point`` is the iterate x^k at which the step was evaluated;
    ``grad_norm`` is ||grad f(x^k)|| on productive steps and ||C_j|| on
    unproductive ones.
    """
    iteration: int
    productive: bool
    step_size: float
    grad_norm: float
    point: np.ndarray = field(repr=False)
    objective: Optional[float] = None
    link: Optional[int] = None


@dataclass
class MdReport:
    """Outcome of one mirror-descent run.

    ``solution`` is the best productive iterate for md1 and the
    step-weighted average of productive iterates for md2.
    """
    algorithm: Algorithm
    eps: float
    theta0: float
    mode: MdMode
    solution: np.ndarray
    objective: float
    max_violation: float
    total_iters: int
    productive_count: int
    unproductive_count: int
    unproductive_by_link: np.ndarray
    wall_time: float
    stop_reason: StopReason
    max_grad_norm: float = 0.0
    score: float = 0.0
    trace: List[StepTrace] = field(default_factory=list)

    def __post_init__(self):
        assert self.productive_count + self.unproductive_count == self.total_iters
        if self.stop_reason == StopReason.CRITERION_MET:
            assert self.productive_count >= 1

    @property
    def utility(self) -> float:
        return -self.objective

    def to_result(self) -> SolveResult:
        return SolveResult(
            algorithm=self.algorithm,
            eps=self.eps,
            theta0=self.theta0,
            mode=self.mode.value,
            iters=self.total_iters,
            productive=self.productive_count,
            unproductive=self.unproductive_count,
            objective=self.objective,
            utility=self.utility,
            max_violation=self.max_violation,
            wall_time_ms=self.wall_time * 1000.0,
            stop_reason=self.stop_reason,
            solution=self.solution.tolist(),
        )
