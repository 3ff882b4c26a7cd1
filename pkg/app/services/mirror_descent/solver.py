"""Euclidean mirror descent with productive/unproductive steps on x >= floor.

A step is productive when every link passes g_j(x) <= eps * ||C_j||; it then
moves against grad f. Otherwise it moves against the gradient C_j of one
failing link. Both variants project onto the (shifted) nonnegative orthant.
"""

import math
from typing import List, Optional

import numpy as np
from loguru import logger

from app.core.config import get_settings
from app.core.exceptions import ConfigurationError, DomainError
from app.models.schemas.solver import Algorithm, MdConfig, MdMode, StopReason, ViolatedPolicy
from app.services.mirror_descent.report import MdReport, StepTrace
from app.services.problem.model import NumProblem
from app.services.problem.oracles import (
    default_theta0,
    eval_objective,
    grad_objective,
    max_violation,
    objective_lipschitz_bound,
    shift_is_feasible,
)
from app.utils.timing import Stopwatch


def project(x: np.ndarray, floor: float) -> np.ndarray:
    """Componentwise max(x_k, floor)."""
    return np.maximum(np.asarray(x, dtype=float), floor)


def v_f_gap(problem: NumProblem, y: np.ndarray, xstar: np.ndarray) -> float:
    """<grad f(y) / ||grad f(y)||, y - x*>, and 0 where the gradient vanishes."""
    grad = grad_objective(problem, y)
    norm = float(np.linalg.norm(grad))
    if norm == 0.0:
        return 0.0
    return float(grad @ (np.asarray(y, dtype=float) - np.asarray(xstar, dtype=float))) / norm


def _safe_objective(problem: NumProblem, x: np.ndarray) -> float:
    try:
        return eval_objective(problem, x)
    except DomainError:
        return float("inf")


class LinkScanner:
    """Productive test over the sparse rows with preallocated buffers.

    Empty rows are skipped: their g_j = -b_j never exceeds the threshold.
    """

    def __init__(self, problem: NumProblem, thresholds: np.ndarray, policy: ViolatedPolicy):
        rows = problem.routing.rows
        live = [j for j, users in enumerate(rows) if users.size]
        sizes = np.array([rows[j].size for j in live], dtype=np.int64)
        self.links = np.array(live, dtype=np.int64)
        self.indices = np.concatenate([rows[j] for j in live])
        self.starts = np.concatenate(([0], np.cumsum(sizes)[:-1])).astype(np.int64)
        self.b = problem.b[self.links]
        self.thresholds = np.asarray(thresholds, dtype=float)[self.links]
        self.policy = policy
        self._gathered = np.empty(self.indices.size)
        self._g = np.empty(self.links.size)
        self._fails = np.empty(self.links.size, dtype=bool)
        self._ratio = np.empty(self.links.size)

    def violated(self, x: np.ndarray) -> Optional[int]:
        """Same answer as ``select_violated`` on g(x), without allocating."""
        np.take(x, self.indices, out=self._gathered)
        np.add.reduceat(self._gathered, self.starts, out=self._g)
        self._g -= self.b
        np.greater(self._g, self.thresholds, out=self._fails)
        if not self._fails.any():
            return None
        if self.policy == ViolatedPolicy.MOST_VIOLATED:
            # failing rows have ratio > 1 and passing rows ratio <= 1
            np.divide(self._g, self.thresholds, out=self._ratio)
            return int(self.links[np.argmax(self._ratio)])
        return int(self.links[np.argmax(self._fails)])


class MirrorDescentSolver:
    """Runs md1 (fixed horizon) or md2 (adaptive stop)."""

    def __init__(self, problem: NumProblem, config: MdConfig):
        self.problem = problem
        self.config = config
        self.settings = get_settings()

        self.eps = config.eps
        self.theta0 = config.theta0 or default_theta0(problem)
        self.floor = config.eps * problem.n if config.mode == MdMode.LOG_SHIFT else 0.0
        self.thresholds = config.eps * problem.row_norms

        if config.start is not None:
            start = np.asarray(config.start, dtype=float)
            if start.shape != (problem.n,):
                raise ConfigurationError(
                    f"start point: expected {problem.n} entries, got {start.size}"
                )
            self.start = project(start, self.floor)
        else:
            self.start = np.full(problem.n, self.floor)

        if config.mode == MdMode.STANDARD and not np.all(self.start > 0):
            raise ConfigurationError(
                "standard mode needs a strictly positive start point: the utility "
                "gradient is unbounded at 0 (use log_shift mode or set a start value)"
            )
        if config.mode == MdMode.LOG_SHIFT and not shift_is_feasible(problem, config.eps):
            logger.warning(
                "shifted domain x >= eps*n = {:.3g} is infeasible: eps*n*|row_j| >= b_j "
                "on some link j (n={} m={} eps={}); expect mostly unproductive steps",
                self.floor, problem.n, problem.m, config.eps,
            )

    # -- stop rules -------------------------------------------------------

    def alg1_horizon(self) -> int:
        """ceil(2 theta0^2 / eps^2), or ceil(2 theta0^2 / eps^4) with the shift."""
        power = 4 if self.config.mode == MdMode.LOG_SHIFT else 2
        return math.ceil(2.0 * self.theta0**2 / self.eps**power)

    def alg2_target(self) -> float:
        return 2.0 * self.theta0**2 / self.eps**2

    def alg2_bound(self) -> Optional[int]:
        """Iteration bound ceil(target * max(1, M_f^2)) on the iterate region."""
        lipschitz = objective_lipschitz_bound(self.problem, self.floor)
        if not math.isfinite(lipschitz):
            return None
        return math.ceil(self.alg2_target() * max(1.0, lipschitz**2))

    def _cap(self, theoretical: Optional[int]) -> Optional[int]:
        if self.config.max_iters_cap is not None:
            return self.config.max_iters_cap
        if theoretical is None:
            return None
        return self.settings.MD_CAP_FACTOR * theoretical

    def _should_trace(self, iteration: int) -> bool:
        every = self.config.trace_every
        return every is not None and iteration % every == 0

    # -- algorithms -------------------------------------------------------

    def run_alg1(self) -> MdReport:
        problem = self.problem
        rows = problem.routing.rows
        norms = problem.row_norms
        scanner = LinkScanner(problem, self.thresholds, self.config.violated_policy)
        buf = np.empty(problem.n)
        step_eps = self.eps**2 if self.config.mode == MdMode.LOG_SHIFT else self.eps

        horizon = self.alg1_horizon()
        cap = self._cap(horizon)
        n_iters = min(horizon, cap)

        logger.info(
            "md1 start: n={} m={} eps={} theta0={:.4g} mode={} horizon={}",
            problem.n, problem.m, self.eps, self.theta0, self.config.mode.value, horizon,
        )

        x = self.start.copy()
        best_x: Optional[np.ndarray] = None
        best_f = float("inf")
        productive = 0
        per_link = np.zeros(problem.m, dtype=np.int64)
        max_gn = 0.0
        stationary = False
        trace: List[StepTrace] = []

        with Stopwatch() as watch:
            for it in range(n_iters):
                j = scanner.violated(x)
                if j is None:
                    grad = grad_objective(problem, x)
                    gn = float(np.linalg.norm(grad))
                    f = eval_objective(problem, x)
                    if f < best_f:
                        best_f, best_x = f, x.copy()
                    max_gn = max(max_gn, gn)
                    productive += 1
                    if gn == 0.0:
                        stationary = True
                        break
                    h = step_eps / gn
                    if self._should_trace(it):
                        trace.append(StepTrace(it, True, h, gn, x.copy(), objective=f))
                    np.multiply(grad, h, out=buf)
                    x -= buf
                    np.maximum(x, self.floor, out=x)
                else:
                    h = step_eps / norms[j]
                    per_link[j] += 1
                    if self._should_trace(it):
                        trace.append(StepTrace(it, False, h, float(norms[j]), x.copy(), link=j))
                    x[rows[j]] -= h
                    np.maximum(x, self.floor, out=x)

        total = productive + int(per_link.sum())
        if best_x is None:
            stop = StopReason.NO_PRODUCTIVE_STEPS
            solution, objective = x, _safe_objective(problem, x)
        else:
            stop = StopReason.CRITERION_MET if total >= horizon or stationary else StopReason.CAP_HIT
            solution, objective = best_x, best_f

        return self._finish(
            Algorithm.MD1, solution, objective, total, productive, per_link,
            watch.elapsed, stop, max_gn, 0.0, trace,
        )

    def run_alg2(self) -> MdReport:
        problem = self.problem
        rows = problem.routing.rows
        norms = problem.row_norms
        scanner = LinkScanner(problem, self.thresholds, self.config.violated_policy)
        buf = np.empty(problem.n)
        eps = self.eps

        target = self.alg2_target()
        cap = self._cap(self.alg2_bound())

        logger.info(
            "md2 start: n={} m={} eps={} theta0={:.4g} mode={} target={:.4g}",
            problem.n, problem.m, eps, self.theta0, self.config.mode.value, target,
        )

        x = self.start.copy()
        sum_h = 0.0
        sum_hx = np.zeros(problem.n)
        score = 0.0
        productive = 0
        per_link = np.zeros(problem.m, dtype=np.int64)
        max_gn = 0.0
        trace: List[StepTrace] = []
        stop = StopReason.CAP_HIT
        it = 0

        with Stopwatch() as watch:
            while cap is None or it < cap:
                j = scanner.violated(x)
                if j is None:
                    grad = grad_objective(problem, x)
                    sq = float(grad @ grad)
                    productive += 1
                    if sq == 0.0:
                        sum_h, sum_hx = 1.0, x.copy()
                        it += 1
                        stop = StopReason.CRITERION_MET
                        break
                    h = eps / sq
                    if self._should_trace(it):
                        trace.append(StepTrace(
                            it, True, h, math.sqrt(sq), x.copy(),
                            objective=eval_objective(problem, x),
                        ))
                    sum_h += h
                    np.multiply(x, h, out=buf)
                    sum_hx += buf
                    score += 1.0 / sq
                    max_gn = max(max_gn, math.sqrt(sq))
                    np.multiply(grad, h, out=buf)
                    x -= buf
                    np.maximum(x, self.floor, out=x)
                else:
                    h = eps / norms[j]
                    if self._should_trace(it):
                        trace.append(StepTrace(it, False, h, float(norms[j]), x.copy(), link=j))
                    per_link[j] += 1
                    score += 1.0
                    x[rows[j]] -= h
                    np.maximum(x, self.floor, out=x)
                it += 1
                if score >= target:
                    stop = StopReason.CRITERION_MET
                    break

        if productive == 0:
            stop = StopReason.NO_PRODUCTIVE_STEPS
            solution = x
        else:
            solution = sum_hx / sum_h

        return self._finish(
            Algorithm.MD2, solution, _safe_objective(problem, solution), it,
            productive, per_link, watch.elapsed, stop, max_gn, score, trace,
        )

    def _finish(
        self,
        algorithm: Algorithm,
        solution: np.ndarray,
        objective: float,
        total: int,
        productive: int,
        per_link: np.ndarray,
        elapsed: float,
        stop: StopReason,
        max_gn: float,
        score: float,
        trace: List[StepTrace],
    ) -> MdReport:
        report = MdReport(
            algorithm=algorithm,
            eps=self.eps,
            theta0=self.theta0,
            mode=self.config.mode,
            solution=solution,
            objective=objective,
            max_violation=max_violation(self.problem, solution),
            total_iters=total,
            productive_count=productive,
            unproductive_count=int(per_link.sum()),
            unproductive_by_link=per_link,
            wall_time=elapsed,
            stop_reason=stop,
            max_grad_norm=max_gn,
            score=score,
            trace=trace,
        )
        log = logger.warning if stop != StopReason.CRITERION_MET else logger.info
        log(
            "{} finished: iters={} productive={} unproductive={} objective={:.6g} "
            "violation={:.3g} stop={} time={:.3f}s",
            algorithm.value, total, productive, report.unproductive_count,
            objective, report.max_violation, stop.value, elapsed,
        )
        return report


def run_alg1(problem: NumProblem, config: MdConfig) -> MdReport:
    """Fixed horizon; returns the best productive iterate."""
    return MirrorDescentSolver(problem, config).run_alg1()


def run_alg2(problem: NumProblem, config: MdConfig) -> MdReport:
    """Adaptive stop; returns the step-weighted productive average."""
    return MirrorDescentSolver(problem, config).run_alg2()
