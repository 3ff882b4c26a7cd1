import math
import os

import numpy as np
import pytest

from app.models.schemas.problem import UtilitySpec
from app.services.problem.model import NumProblem, RoutingMatrix

pytest_plugins = []

# U* of the two-user single-link instance: x* = (0.5, 0.5)
TWO_USER_OPTIMUM = -2.0 * math.log(2.0)
# U* of the three-user two-link chain: x* = (2/3, 1/3, 2/3)
CHAIN_OPTIMUM = 2.0 * math.log(2.0 / 3.0) + math.log(1.0 / 3.0)


def make_problem(m, n, rows, b, utility=None):
    return NumProblem.build(RoutingMatrix.from_rows(m, n, rows), b, utility)


def pytest_collection_modifyitems(config, items):
    if os.environ.get("NUM_PAPER_SCALE") == "1":
        return
    skip = pytest.mark.skip(reason="set NUM_PAPER_SCALE=1 to run paper-scale experiments")
    for item in items:
        if "paper_scale" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def two_users():
    """C = [[1, 1]], b = (1), log utilities."""
    return make_problem(1, 2, [[0, 1]], [1.0])


@pytest.fixture
def chain():
    """C = [[1, 1, 0], [0, 1, 1]], b = (1, 1), log utilities."""
    return make_problem(2, 3, [[0, 1], [1, 2]], [1.0, 1.0])


@pytest.fixture
def roomy_two_users():
    """Two users on one link so wide that no tested run reaches it."""
    return make_problem(1, 2, [[0, 1]], [100.0])


@pytest.fixture
def weighted_two_users():
    return make_problem(1, 2, [[0, 1]], [1.0], UtilitySpec(kind="weighted_log", weights=[3.0, 1.0]))


@pytest.fixture
def power_two_users():
    return make_problem(1, 2, [[0, 1]], [1.0], UtilitySpec(kind="power", alpha=2.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)
