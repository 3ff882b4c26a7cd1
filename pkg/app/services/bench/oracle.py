"""Independent KKT reference solver for tiny instances.

Enumerates candidate active sets A, solves the tight system
<C_j, x(lambda)> = b_j (j in A) for lambda_A by damped Newton on the dual
restricted to A, and keeps the best primal-feasible candidate with
lambda >= 0.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.optimize import minimize

from app.core.config import get_settings
from app.core.exceptions import OracleFailureError, OracleRefusedError
from app.services.problem.model import NumProblem
from app.services.problem.oracles import eval_utility, max_violation

NEWTON_MAX_ITERS = 100
FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class ReferenceSolution:
    x: np.ndarray
    lam: np.ndarray
    utility: float
    active: Tuple[int, ...]


class _RestrictedDual:
    """phi_A(lambda_A) = <lambda_A, b_A> + sum_k (u_k(x_k) - q_k x_k)."""

    def __init__(self, problem: NumProblem, active: Sequence[int]):
        self.utility = problem.utility
        self.C = problem.routing.dense()[list(active)]
        self.b = problem.b[list(active)]

    def responses(self, lam: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        q = self.C.T @ lam
        if np.any(q <= 0):
            return None
        return q, self.utility.best_response(q, np.inf)

    def value(self, lam: np.ndarray) -> float:
        r = self.responses(lam)
        if r is None:
            return np.inf
        q, x = r
        return float(lam @ self.b + np.sum(self.utility.values(x) - q * x))

    def gradient(self, lam: np.ndarray) -> np.ndarray:
        q, x = self.responses(lam)
        return self.b - self.C @ x

    def hessian(self, lam: np.ndarray) -> np.ndarray:
        q = self.C.T @ lam
        return (self.C * -self.utility.response_slope(q)) @ self.C.T


def _newton(dual: _RestrictedDual, lam: np.ndarray, tol: float) -> Optional[np.ndarray]:
    for _ in range(NEWTON_MAX_ITERS):
        grad = dual.gradient(lam)
        if np.max(np.abs(grad)) <= tol:
            return lam
        direction = np.linalg.lstsq(dual.hessian(lam), -grad, rcond=None)[0]
        slope = float(grad @ direction)
        f0 = dual.value(lam)
        t = 1.0
        while t > 1e-14:
            candidate = lam + t * direction
            if dual.value(candidate) <= f0 + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            return None
        lam = candidate
    return None


def _fallback(dual: _RestrictedDual, lam: np.ndarray, tol: float) -> Optional[np.ndarray]:
    result = minimize(
        dual.value,
        lam,
        jac=dual.gradient,
        method="L-BFGS-B",
        bounds=[(1e-12, None)] * lam.size,
        options={"ftol": 1e-15, "gtol": tol, "maxiter": 10000},
    )
    r = dual.responses(result.x)
    if r is None or np.max(np.abs(dual.gradient(result.x))) > 1e-8:
        return None
    return result.x


def solve_active_set(problem: NumProblem, active: Sequence[int]) -> Optional[np.ndarray]:
    """Multipliers making every link in ``active`` tight, or None."""
    dual = _RestrictedDual(problem, active)
    sizes = dual.C.sum(axis=1)
    start = np.maximum(sizes, 1.0) / dual.b
    tol = 1e-11 * max(1.0, float(np.max(dual.b)))
    lam = _newton(dual, start, tol)
    if lam is None:
        logger.debug("newton failed on active set {}; trying L-BFGS-B", tuple(active))
        lam = _fallback(dual, start, tol)
    return lam


def reference_solution(problem: NumProblem) -> ReferenceSolution:
    settings = get_settings()
    if problem.n > settings.ORACLE_MAX_USERS or problem.m > settings.ORACLE_MAX_LINKS:
        raise OracleRefusedError(
            f"reference oracle handles n <= {settings.ORACLE_MAX_USERS} and "
            f"m <= {settings.ORACLE_MAX_LINKS}; got n={problem.n}, m={problem.m}"
        )

    dense = problem.routing.dense()
    best: Optional[ReferenceSolution] = None
    for size in range(1, problem.m + 1):
        for active in combinations(range(problem.m), size):
            if not np.all(dense[list(active)].any(axis=0)):
                continue
            lam_active = solve_active_set(problem, active)
            if lam_active is None or np.any(lam_active < -1e-10):
                continue
            lam = np.zeros(problem.m)
            lam[list(active)] = np.maximum(lam_active, 0.0)
            q = dense.T @ lam
            if np.any(q <= 0):
                continue
            x = problem.utility.best_response(q, np.inf)
            if max_violation(problem, x) > FEASIBILITY_TOL:
                continue
            utility = eval_utility(problem, x)
            if best is None or utility > best.utility:
                best = ReferenceSolution(x=x, lam=lam, utility=utility, active=active)

    if best is None:
        raise OracleFailureError("no KKT-consistent active set found")
    return best
