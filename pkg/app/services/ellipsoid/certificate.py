"""Accuracy certificates over ellipsoid iterations and primal recovery.

A certificate is a weight vector xi >= 0 over recorded steps, summing to 1 and
supported on productive steps (centers inside Lambda_2R). The recovered
primal point is sum_t xi_t x(lambda^t).
"""

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from app.core.exceptions import NoProductiveStepsError
from app.models.schemas.solver import CertificatePolicy


class EmHistory:
    """Per-step dual values and productive flags, plus prefix sums of x(lambda^t).

    Best responses are not stored per step: prefix sums are snapshotted at
    every ``stride``-th step, so a window starting at a snapshot can be
    averaged exactly in O(n) memory per snapshot.
    """

    def __init__(self, n: int, capacity: int, stride: int = 1):
        self.n = n
        self.stride = max(1, stride)
        self.dual_values = np.full(capacity, np.nan)
        self.productive = np.zeros(capacity, dtype=bool)
        self.length = 0
        self._running_sum = np.zeros(n)
        self._running_count = 0
        self._snapshots: List[Tuple[int, np.ndarray, int]] = []

    def record(self, productive: bool, dual_value: float = math.nan, x: np.ndarray = None) -> None:
        t = self.length
        if t % self.stride == 0:
            self._snapshots.append((t, self._running_sum.copy(), self._running_count))
        if productive:
            self.productive[t] = True
            self.dual_values[t] = dual_value
            self._running_sum += x
            self._running_count += 1
        self.length += 1

    @property
    def productive_count(self) -> int:
        return self._running_count

    def window_starts(self) -> List[int]:
        return [t for t, _, _ in self._snapshots]

    def window_mean(self, start: int) -> np.ndarray:
        """Mean of x(lambda^t) over productive t >= start; start must be a snapshot."""
        for t, partial, count in self._snapshots:
            if t == start:
                return (self._running_sum - partial) / (self._running_count - count)
        raise ValueError(f"step {start} is not a snapshot boundary")


@dataclass
class Certificate:
    xi: np.ndarray
    productive_mask: np.ndarray
    window_start: int = 0
    policy: CertificatePolicy = CertificatePolicy.BEST_WINDOW
    support: int = field(init=False)

    def __post_init__(self):
        self.support = int(np.count_nonzero(self.xi))


def _best_window_start(history: EmHistory) -> int:
    """Snapshot start whose productive suffix has the smallest mean dual value."""
    size = history.length
    values = np.where(history.productive[:size], history.dual_values[:size], 0.0)
    suffix_sum = np.cumsum(values[::-1])[::-1]
    suffix_count = np.cumsum(history.productive[:size][::-1])[::-1]

    best_start, best_mean = 0, math.inf
    for start in history.window_starts():
        if start >= size or suffix_count[start] == 0:
            continue
        mean = suffix_sum[start] / suffix_count[start]
        if mean < best_mean:
            best_start, best_mean = start, mean
    return best_start


def build_certificate(
    history: EmHistory, policy: CertificatePolicy = CertificatePolicy.BEST_WINDOW
) -> Certificate:
    """Uniform weights over the productive steps of the chosen window."""
    if history.productive_count == 0:
        raise NoProductiveStepsError(
            "no ellipsoid center fell inside Lambda_2R; increase the dual radius R"
        )
    size = history.length
    mask = history.productive[:size].copy()
    start = 0 if policy == CertificatePolicy.UNIFORM else _best_window_start(history)

    support = mask.copy()
    support[:start] = False
    xi = np.zeros(size)
    xi[support] = 1.0 / np.count_nonzero(support)
    return Certificate(xi=xi, productive_mask=mask, window_start=start, policy=policy)


def recover_primal(history: EmHistory, certificate: Certificate) -> np.ndarray:
    """x_hat = sum_t xi_t x(lambda^t)."""
    return history.window_mean(certificate.window_start)
