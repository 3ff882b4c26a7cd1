"""Seeded random instances: Bernoulli routing and uniform capacities.

C_k^j ~ Bernoulli(p) and b_j ~ U[b_min, b_max], drawn from numpy's PCG64
generator so that an instance is a pure function of its spec. The draw
order is fixed: the full m x n matrix row by row, then b, then redraws of
any all-zero user column.
"""

import numpy as np
from loguru import logger

from app.core.config import get_settings
from app.core.exceptions import GenerationError
from app.models.schemas.bench import InstanceSpec
from app.services.problem.model import NumProblem, RoutingMatrix


def instance_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def cell_seed(base_seed: int, n: int, m: int, repetition: int) -> int:
    """Seed for one sweep cell; independent of eps so tables share instances."""
    sequence = np.random.SeedSequence([base_seed, n, m, repetition])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def generate_instance(spec: InstanceSpec) -> NumProblem:
    max_redraws = get_settings().GENERATOR_MAX_REDRAWS
    rng = instance_rng(spec.seed)

    routing = rng.random((spec.m, spec.n)) < spec.p
    b = rng.uniform(spec.b_min, spec.b_max, size=spec.m)

    empty = np.flatnonzero(~routing.any(axis=0))
    for k in empty:
        for _ in range(max_redraws):
            column = rng.random(spec.m) < spec.p
            if column.any():
                routing[:, k] = column
                break
        else:
            raise GenerationError(
                f"user {k} got an empty route after {max_redraws} redraws (p={spec.p}, m={spec.m})"
            )
    if empty.size:
        logger.debug("redrew {} empty user columns (seed={})", empty.size, spec.seed)

    rows = [np.flatnonzero(routing[j]).tolist() for j in range(spec.m)]
    return NumProblem.build(
        RoutingMatrix.from_rows(spec.m, spec.n, rows), b, spec.utility, seed=spec.seed
    )
