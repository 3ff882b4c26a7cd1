"""Exact objective, constraint and gradient oracles of the minimization form.

The solvers minimize f(x) = -U(x) subject to g_j(x) = <C_j, x> - b_j <= 0.
All oracles are pure functions of (problem, point).
"""

from typing import Optional

import numpy as np

from app.models.schemas.solver import ViolatedPolicy
from app.services.problem.model import NumProblem
from app.services.problem.utility import require_positive


def eval_objective(problem: NumProblem, x: np.ndarray) -> float:
    """f(x) = -sum_k u_k(x_k)."""
    x = np.asarray(x, dtype=float)
    require_positive(x)
    return -float(np.sum(problem.utility.values(x)))


def eval_utility(problem: NumProblem, x: np.ndarray) -> float:
    return -eval_objective(problem, x)


def grad_objective(problem: NumProblem, x: np.ndarray) -> np.ndarray:
    """Gradient of f: component k is -u_k'(x_k)."""
    x = np.asarray(x, dtype=float)
    require_positive(x)
    return -problem.utility.derivative(x)


def constraint_values(problem: NumProblem, x: np.ndarray) -> np.ndarray:
    """All g_j(x) at once."""
    return problem.routing.matrix @ np.asarray(x, dtype=float) - problem.b


def eval_constraint(problem: NumProblem, j: int, x: np.ndarray) -> float:
    """g_j(x) = <C_j, x> - b_j; its gradient is the constant row C_j."""
    if not 0 <= j < problem.m:
        raise IndexError(f"link index {j} out of range 0..{problem.m - 1}")
    x = np.asarray(x, dtype=float)
    return float(np.sum(x[problem.routing.rows[j]]) - problem.b[j])


def max_violation(problem: NumProblem, x: np.ndarray) -> float:
    """max(0, max_j g_j(x)); zero exactly when x is capacity-feasible."""
    return max(0.0, float(np.max(constraint_values(problem, x))))


def violation_norm(problem: NumProblem, x: np.ndarray) -> float:
    """||[C x - b]_+||_2."""
    return float(np.linalg.norm(np.maximum(constraint_values(problem, x), 0.0)))


def select_violated(
    g: np.ndarray,
    thresholds: np.ndarray,
    policy: ViolatedPolicy = ViolatedPolicy.FIRST,
) -> Optional[int]:
    """Pick the row an unproductive step follows, or None if all rows pass.

    Row j fails when g_j > thresholds_j.
    """
    failing = np.flatnonzero(g > thresholds)
    if failing.size == 0:
        return None
    if policy == ViolatedPolicy.MOST_VIOLATED:
        excess = g[failing] / np.maximum(thresholds[failing], np.finfo(float).tiny)
        return int(failing[np.argmax(excess)])
    return int(failing[0])


def find_violated(
    problem: NumProblem,
    x: np.ndarray,
    eps: float,
    policy: ViolatedPolicy = ViolatedPolicy.FIRST,
) -> Optional[int]:
    """Smallest j with g_j(x) > eps * ||C_j||_2, or None."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return select_violated(constraint_values(problem, x), eps * problem.row_norms, policy)


def default_theta0(problem: NumProblem) -> float:
    """sqrt(n/2) * max_j b_j, which bounds ||x^0 - x*|| / sqrt(2) from x^0 = 0."""
    return float(np.sqrt(problem.n / 2.0) * problem.max_capacity)


def objective_lipschitz_bound(problem: NumProblem, floor: float) -> float:
    """Largest ||grad f|| on {x >= floor}; infinite when floor is 0.

    Marginal utilities decrease in x_k, so the bound is attained at the
    corner (floor, ..., floor).
    """
    if floor <= 0:
        return float("inf")
    return float(np.linalg.norm(problem.utility.derivative(np.full(problem.n, floor))))


def shift_is_feasible(problem: NumProblem, eps: float) -> bool:
    """Whether (eps*n, ..., eps*n) satisfies every capacity constraint.

    Requires eps * n * |row j| < b_j strictly on every link.
    """
    sizes = np.array([users.size for users in problem.routing.rows], dtype=float)
    return bool(np.all(eps * problem.n * sizes < problem.b))
