"""Per-user utility families and their best responses to a link price."""

from abc import ABC, abstractmethod
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from app.core.exceptions import DomainError, InvalidProblemError
from app.models.schemas.problem import UtilityKind, UtilitySpec


def require_positive(x: np.ndarray) -> None:
    """Reject points outside the open positive orthant."""
    if not np.all(x > 0):
        bad = int(np.flatnonzero(~(x > 0))[0])
        raise DomainError(
            f"rate x[{bad}] = {x[bad]!r} is outside the utility domain (x > 0)"
        )


def solve_stationarity(
    marginal: Callable[[float], float], price: float, x_max: float
) -> float:
    """Solve marginal(x) = price on (0, x_max] by bracketed bisection.

    ``marginal`` must be decreasing. Saturates at ``x_max`` when the
    marginal utility there still exceeds the price.
    """
    if marginal(x_max) >= price:
        return x_max
    lo = x_max
    for _ in range(2000):
        lo *= 0.5
        if marginal(lo) > price or lo < 1e-300:
            break
    if marginal(lo) <= price:
        return lo
    return brentq(
        lambda t: marginal(t) - price, lo, x_max, xtol=1e-300, rtol=4 * np.finfo(float).eps
    )


class Utility(ABC):
    """Separable utility U(x) = sum_k u_k(x_k) over n users."""

    kind: UtilityKind

    def __init__(self, n: int):
        self.n = n

    @abstractmethod
    def values(self, x: np.ndarray) -> np.ndarray:
        """Per-user utilities u_k(x_k)."""

    @abstractmethod
    def derivative(self, x: np.ndarray) -> np.ndarray:
        """Per-user marginal utilities u_k'(x_k)."""

    def best_response(self, price: np.ndarray, x_max: float) -> np.ndarray:
        """Per-user argmax of u_k(x) - price_k * x over (0, x_max].

        Families with a closed form override this; the default bisects on
        the marginal utility.
        """
        out = np.empty(self.n)
        point = np.empty(self.n)
        for k in range(self.n):
            def marginal(t: float, k: int = k) -> float:
                point.fill(t)
                return float(self.derivative(point)[k])
            out[k] = solve_stationarity(marginal, float(price[k]), x_max)
        return out

    @abstractmethod
    def response_slope(self, price: np.ndarray) -> np.ndarray:
        """Derivative of the unclamped best response with respect to price."""


class WeightedLogUtility(Utility):
    """u_k(x) = w_k log x."""

    kind = UtilityKind.WEIGHTED_LOG

    def __init__(self, weights: np.ndarray):
        super().__init__(len(weights))
        self.weights = np.asarray(weights, dtype=float)

    def values(self, x: np.ndarray) -> np.ndarray:
        return self.weights * np.log(x)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        return self.weights / x

    def best_response(self, price: np.ndarray, x_max: float) -> np.ndarray:
        return np.minimum(self.weights / price, x_max)

    def response_slope(self, price: np.ndarray) -> np.ndarray:
        return -self.weights / price**2


class LogUtility(WeightedLogUtility):
    """u_k(x) = log x for every user."""

    kind = UtilityKind.LOG

    def __init__(self, n: int):
        super().__init__(np.ones(n))


class PowerUtility(Utility):
    """alpha-fair utility u_k(x) = x^(1-alpha) / (1-alpha)."""

    kind = UtilityKind.POWER

    def __init__(self, n: int, alpha: float):
        super().__init__(n)
        self.alpha = float(alpha)

    def values(self, x: np.ndarray) -> np.ndarray:
        return x ** (1.0 - self.alpha) / (1.0 - self.alpha)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        return x ** (-self.alpha)

    def best_response(self, price: np.ndarray, x_max: float) -> np.ndarray:
        return np.minimum(price ** (-1.0 / self.alpha), x_max)

    def response_slope(self, price: np.ndarray) -> np.ndarray:
        return -(1.0 / self.alpha) * price ** (-1.0 / self.alpha - 1.0)


def build_utility(spec: UtilitySpec, n: int) -> Utility:
    """Instantiate the utility family described by ``spec`` for n users."""
    if spec.kind == UtilityKind.LOG:
        return LogUtility(n)
    if spec.kind == UtilityKind.WEIGHTED_LOG:
        if len(spec.weights) != n:
            raise InvalidProblemError(
                f"utility weights: expected {n} entries, got {len(spec.weights)}"
            )
        return WeightedLogUtility(np.asarray(spec.weights, dtype=float))
    return PowerUtility(n, spec.alpha)
