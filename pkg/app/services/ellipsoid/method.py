"""Central-cut ellipsoid method on the dual, restricted to Lambda_2R.

Ellipsoids are E_t = {lambda^t + B_t u : ||u|| <= 1} with B_0 = 2R I_m.
Centers outside Lambda_2R = {lambda >= 0, ||lambda|| <= 2R} are cut with a
separating hyperplane and do not count as productive.
"""

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from loguru import logger

from app.core.config import get_settings
from app.core.exceptions import ConfigurationError, SingularEllipsoidError
from app.models.schemas.solver import EmConfig, EmDirection, StopReason
from app.services.ellipsoid.certificate import (
    Certificate,
    EmHistory,
    build_certificate,
    recover_primal,
)
from app.services.ellipsoid.dual import DualOracle
from app.services.problem.model import NumProblem
from app.services.problem.oracles import eval_utility, max_violation, violation_norm
from app.utils.timing import Stopwatch


@dataclass(frozen=True, eq=False)
class EllipsoidState:
    B: np.ndarray
    lam: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, lambda0: np.ndarray, radius: float) -> "EllipsoidState":
        m = len(lambda0)
        return cls(B=2.0 * radius * np.eye(m), lam=np.array(lambda0, dtype=float), t=0)


def em_step(
    state: EllipsoidState,
    g: np.ndarray,
    direction: EmDirection = EmDirection.STANDARD,
) -> EllipsoidState:
    """Shrink the ellipsoid onto the half {lambda : <g, lambda - lambda^t> <= 0}."""
    B = state.B
    m = B.shape[0]
    q = B.T @ g
    if direction == EmDirection.BBT:
        v = B.T @ q
    else:
        v = q
    norm = float(np.linalg.norm(v))
    if not math.isfinite(norm) or norm == 0.0:
        raise SingularEllipsoidError(
            f"ellipsoid collapsed at step {state.t} (||B^T g|| = {norm}); "
            "restart with a larger radius R"
        )
    p = v / norm
    Bp = B @ p
    beta = m / (m + 1.0)
    if m > 1:
        alpha = m / math.sqrt(m * m - 1.0)
        B_next = alpha * B + (beta - alpha) * np.outer(Bp, p)
    else:
        B_next = beta * B
    return EllipsoidState(B=B_next, lam=state.lam - Bp / (m + 1.0), t=state.t + 1)


def em_budget(m: int, M: float, radius: float, eps: float, constant: Optional[float] = None) -> int:
    """2 m (m+1) ceil(log(constant * M * R / eps)), with constant = 32*4 by default."""
    constant = constant if constant is not None else get_settings().EM_BUDGET_CONSTANT
    rounds = max(1, math.ceil(math.log(constant * M * radius / eps)))
    return 2 * m * (m + 1) * rounds


def separating_direction(lam: np.ndarray, radius: float) -> Optional[np.ndarray]:
    """Cut direction for centers outside int Lambda_2R, else None."""
    nonpositive = np.flatnonzero(lam <= 0)
    if nonpositive.size:
        g = np.zeros_like(lam)
        g[nonpositive[0]] = -1.0
        return g
    norm = float(np.linalg.norm(lam))
    if norm >= 2.0 * radius:
        return lam / norm
    return None


@dataclass(frozen=True, eq=False)
class EmStep:
    """One iteration: the center it was taken at and the cut it used."""
    state: EllipsoidState
    productive: bool
    g: np.ndarray
    x: Optional[np.ndarray] = None
    dual_value: Optional[float] = None
    price_clamped: bool = False
    rate_clamped: bool = False


@dataclass
class EmReport:
    lambda_final: np.ndarray
    dual_value: float
    recovered_x: np.ndarray
    primal_utility: float
    violation_norm: float
    max_violation: float
    gap: float
    iterations: int
    productive_count: int
    budget: int
    radius: float
    M: float
    wall_time: float
    stop_reason: StopReason
    certificate: Certificate
    history: EmHistory = field(repr=False)
    price_clamps: int = 0
    rate_clamps: int = 0

    def __post_init__(self):
        if self.max_violation == 0.0:
            assert self.gap >= -1e-9, "weak duality violated"


class EllipsoidSolver:
    """Runs the ellipsoid method on the dual and recovers a primal point."""

    def __init__(self, problem: NumProblem, config: EmConfig):
        settings = get_settings()
        self.problem = problem
        self.config = config
        self.oracle = DualOracle(problem, price_floor=config.price_floor)
        self.radius = config.radius or settings.EM_RADIUS_FACTOR * problem.m
        self.M = config.M or self.oracle.lipschitz_bound()
        self.budget = em_budget(problem.m, self.M, self.radius, config.eps)
        self.limit = min(self.budget, config.max_iters) if config.max_iters else self.budget
        self.stride = max(1, math.ceil(self.limit / settings.EM_CHECKPOINTS))

        if config.lambda0 is not None:
            lambda0 = np.asarray(config.lambda0, dtype=float)
            if lambda0.shape != (problem.m,):
                raise ConfigurationError(f"lambda0: expected {problem.m} entries, got {lambda0.size}")
        else:
            lambda0 = np.full(problem.m, settings.EM_LAMBDA0)
        self.lambda0 = lambda0

    def steps(self) -> Iterator[EmStep]:
        """Yield each iteration before its update; stops at the budget or at a zero subgradient."""
        state = EllipsoidState.initial(self.lambda0, self.radius)
        direction = self.config.direction
        for _ in range(self.limit):
            g = separating_direction(state.lam, self.radius)
            if g is not None:
                yield EmStep(state=state, productive=False, g=g)
            else:
                r = self.oracle.responses(state.lam)
                g = self.oracle.subgradient(state.lam, r)
                yield EmStep(
                    state=state,
                    productive=True,
                    g=g,
                    x=r.x,
                    dual_value=self.oracle.value(state.lam, r),
                    price_clamped=r.price_clamped,
                    rate_clamped=r.rate_clamped,
                )
                if not np.any(g):
                    return
            state = em_step(state, g, direction)

    def run(self) -> EmReport:
        problem = self.problem
        logger.info(
            "em start: n={} m={} eps={} R={:.4g} M={:.4g} budget={} limit={}",
            problem.n, problem.m, self.config.eps, self.radius, self.M, self.budget, self.limit,
        )

        history = EmHistory(problem.n, self.limit, self.stride)
        best_lam = self.lambda0
        best_value = math.inf
        price_clamps = rate_clamps = 0
        stationary = False

        with Stopwatch() as watch:
            for step in self.steps():
                history.record(step.productive, step.dual_value, step.x)
                if not step.productive:
                    continue
                price_clamps += step.price_clamped
                rate_clamps += step.rate_clamped
                if step.dual_value < best_value:
                    best_value, best_lam = step.dual_value, step.state.lam
                if not np.any(step.g):
                    stationary = True
            certificate = build_certificate(history, self.config.certificate_policy)
            x_hat = recover_primal(history, certificate)

        if price_clamps or rate_clamps:
            logger.warning(
                "em clamps engaged: price floor on {} steps, rate cap on {} steps",
                price_clamps, rate_clamps,
            )

        if stationary or history.length >= self.budget:
            stop = StopReason.CRITERION_MET
        else:
            stop = StopReason.CAP_HIT

        utility = eval_utility(problem, x_hat)
        report = EmReport(
            lambda_final=best_lam,
            dual_value=best_value,
            recovered_x=x_hat,
            primal_utility=utility,
            violation_norm=violation_norm(problem, x_hat),
            max_violation=max_violation(problem, x_hat),
            gap=best_value - utility,
            iterations=history.length,
            productive_count=history.productive_count,
            budget=self.budget,
            radius=self.radius,
            M=self.M,
            wall_time=watch.elapsed,
            stop_reason=stop,
            certificate=certificate,
            history=history,
            price_clamps=price_clamps,
            rate_clamps=rate_clamps,
        )
        log = logger.info if stop == StopReason.CRITERION_MET else logger.warning
        log(
            "em finished: iters={} productive={} support={} utility={:.6g} "
            "gap={:.3g} violation={:.3g} stop={} time={:.3f}s",
            report.iterations, report.productive_count, certificate.support,
            utility, report.gap, report.violation_norm, stop.value, watch.elapsed,
        )
        return report


def em_run(problem: NumProblem, config: EmConfig) -> EmReport:
    return EllipsoidSolver(problem, config).run()
