"""Lagrangian dual of the NUM problem over link prices lambda >= 0.

Users answer a price vector with their best responses
x_k(lambda) = argmax_x {u_k(x) - x <lambda, C_k>}; the dual function is
phi(lambda) = <lambda, b> + sum_k (u_k(x_k) - q_k x_k) with q = C^T lambda.
Prices are lifted to ``price_floor`` and rates capped at ``x_max`` before
solving, which keeps phi finite and its subgradient bounded.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.core.config import get_settings
from app.services.problem.model import NumProblem
from app.services.problem.oracles import eval_utility


@dataclass(frozen=True)
class Responses:
    x: np.ndarray
    prices: np.ndarray
    price_clamped: bool
    rate_clamped: bool


class DualOracle:
    """Best responses, dual value and dual subgradient for one problem."""

    def __init__(
        self,
        problem: NumProblem,
        price_floor: Optional[float] = None,
        x_max: Optional[float] = None,
    ):
        settings = get_settings()
        self.problem = problem
        self.price_floor = price_floor if price_floor is not None else settings.PRICE_FLOOR
        self.x_max = x_max if x_max is not None else settings.RATE_CAP_FACTOR * problem.max_capacity

    def prices(self, lam: np.ndarray) -> np.ndarray:
        """Per-user path price q_k = <lambda, C_k>."""
        return self.problem.routing.matrix.T @ np.asarray(lam, dtype=float)

    def responses(self, lam: np.ndarray) -> Responses:
        q = self.prices(lam)
        lifted = np.maximum(q, self.price_floor)
        x = self.problem.utility.best_response(lifted, self.x_max)
        return Responses(
            x=x,
            prices=q,
            price_clamped=bool(np.any(q < self.price_floor)),
            rate_clamped=bool(np.any(x >= self.x_max)),
        )

    def best_response(self, k: int, price: float) -> float:
        if not 0 <= k < self.problem.n:
            raise IndexError(f"user index {k} out of range 0..{self.problem.n - 1}")
        q = np.full(self.problem.n, max(float(price), self.price_floor))
        return float(self.problem.utility.best_response(q, self.x_max)[k])

    def value(self, lam: np.ndarray, responses: Optional[Responses] = None) -> float:
        lam = np.asarray(lam, dtype=float)
        r = responses or self.responses(lam)
        lagrangian = self.problem.utility.values(r.x) - r.prices * r.x
        return float(lam @ self.problem.b + np.sum(lagrangian))

    def subgradient(self, lam: np.ndarray, responses: Optional[Responses] = None) -> np.ndarray:
        """Danskin subgradient b - C x(lambda)."""
        r = responses or self.responses(lam)
        return self.problem.b - self.problem.routing.matrix @ r.x

    def lipschitz_bound(self) -> float:
        """||b|| + M_g * sqrt(n) * x_max, a bound on ||b - C x(lambda)||."""
        p = self.problem
        return float(np.linalg.norm(p.b) + p.M_g * np.sqrt(p.n) * self.x_max)


def best_response(problem: NumProblem, k: int, price: float) -> float:
    return DualOracle(problem).best_response(k, price)


def dual_value(problem: NumProblem, lam: np.ndarray) -> float:
    return DualOracle(problem).value(lam)


def dual_subgradient(problem: NumProblem, lam: np.ndarray) -> np.ndarray:
    return DualOracle(problem).subgradient(lam)


def duality_gap(problem: NumProblem, x: np.ndarray, lam: np.ndarray) -> float:
    """phi(lambda) - U(x); nonnegative whenever x is capacity-feasible."""
    return dual_value(problem, lam) - eval_utility(problem, x)
