"""Immutable NUM instance: sparse boolean routing, capacities, utilities."""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from app.core.exceptions import InvalidProblemError
from app.models.schemas.problem import UtilitySpec
from app.services.problem.utility import Utility, build_utility


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class RoutingMatrix:
    """Boolean m x n routing matrix stored as sorted user lists per link."""

    m: int
    n: int
    rows: Tuple[np.ndarray, ...]
    matrix: sparse.csr_matrix = field(repr=False)
    row_norms: np.ndarray = field(repr=False)

    @classmethod
    def from_rows(cls, m: int, n: int, rows: Sequence[Sequence[int]]) -> "RoutingMatrix":
        if len(rows) != m:
            raise InvalidProblemError(f"routing: expected {m} rows, got {len(rows)}")

        normalized = []
        for j, row in enumerate(rows):
            users = np.asarray(sorted(row), dtype=np.int64)
            if users.size and (users[0] < 0 or users[-1] >= n):
                raise InvalidProblemError(
                    f"routing: row {j} references a user outside 0..{n - 1}"
                )
            if users.size != np.unique(users).size:
                raise InvalidProblemError(f"routing: row {j} lists a user twice")
            normalized.append(_frozen(users))

        counts = np.zeros(n, dtype=np.int64)
        for users in normalized:
            counts[users] += 1
        if np.any(counts == 0):
            k = int(np.flatnonzero(counts == 0)[0])
            raise InvalidProblemError(
                f"routing: user {k} is not routed over any link (column C_{k} is zero)"
            )

        indptr = np.zeros(m + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([users.size for users in normalized])
        indices = (
            np.concatenate(normalized) if normalized else np.empty(0, dtype=np.int64)
        )
        matrix = sparse.csr_matrix(
            (np.ones(indices.size), indices, indptr), shape=(m, n)
        )
        norms = np.sqrt(np.array([users.size for users in normalized], dtype=float))
        return cls(m=m, n=n, rows=tuple(normalized), matrix=matrix, row_norms=_frozen(norms))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def density(self) -> float:
        return self.matrix.nnz / float(self.m * self.n)


@dataclass(frozen=True, eq=False)
class NumProblem:
    """Maximize sum_k u_k(x_k) subject to C x <= b.

    Shared read-only by every solver; all derived constants are computed at
    construction.
    """

    routing: RoutingMatrix
    b: np.ndarray
    utility_spec: UtilitySpec
    utility: Utility = field(repr=False)
    seed: Optional[int] = None

    @classmethod
    def build(
        cls,
        routing: RoutingMatrix,
        b: Sequence[float],
        utility_spec: Optional[UtilitySpec] = None,
        seed: Optional[int] = None,
    ) -> "NumProblem":
        b = np.array(b, dtype=float)
        if b.shape != (routing.m,):
            raise InvalidProblemError(
                f"capacities: expected {routing.m} entries, got {b.size}"
            )
        if not np.all(b > 0):
            j = int(np.flatnonzero(~(b > 0))[0])
            raise InvalidProblemError(f"capacities: b[{j}] = {b[j]!r} is not strictly positive")
        utility_spec = utility_spec or UtilitySpec()
        utility = build_utility(utility_spec, routing.n)
        return cls(
            routing=routing,
            b=_frozen(b),
            utility_spec=utility_spec,
            utility=utility,
            seed=seed,
        )

    @property
    def n(self) -> int:
        return self.routing.n

    @property
    def m(self) -> int:
        return self.routing.m

    @property
    def row_norms(self) -> np.ndarray:
        return self.routing.row_norms

    @property
    def M_g(self) -> float:
        """Exact Lipschitz bound of the constraints, max_j ||C_j||_2."""
        return float(self.routing.row_norms.max())

    @property
    def max_capacity(self) -> float:
        return float(self.b.max())
