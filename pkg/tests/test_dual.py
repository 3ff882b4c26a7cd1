import math

import numpy as np
import pytest

from app.models.schemas.problem import UtilitySpec
from app.services.ellipsoid import (
    DualOracle,
    best_response,
    dual_subgradient,
    dual_value,
    duality_gap,
)
from app.services.problem.oracles import eval_utility
from tests.conftest import TWO_USER_OPTIMUM, make_problem


def test_best_response_closed_forms(two_users, weighted_two_users, power_two_users):
    assert best_response(two_users, 0, 2.0) == pytest.approx(0.5)
    assert best_response(weighted_two_users, 0, 2.0) == pytest.approx(1.5)
    assert best_response(weighted_two_users, 1, 2.0) == pytest.approx(0.5)
    assert best_response(power_two_users, 1, 4.0) == pytest.approx(0.5)


def test_best_response_saturates_at_rate_cap(two_users):
    oracle = DualOracle(two_users)
    assert oracle.x_max == pytest.approx(10.0)
    assert best_response(two_users, 0, 0.0) == pytest.approx(10.0)
    r = oracle.responses(np.zeros(1))
    assert r.price_clamped and r.rate_clamped


def test_best_response_index_check(two_users):
    with pytest.raises(IndexError):
        best_response(two_users, 2, 1.0)


def test_best_response_is_optimal(chain, rng):
    oracle = DualOracle(chain)
    utility = chain.utility
    for _ in range(20):
        q = rng.uniform(0.05, 5.0, size=3)
        x = utility.best_response(q, oracle.x_max)
        best = utility.values(x) - q * x
        others = rng.uniform(1e-6, oracle.x_max, size=(1000, 3))
        assert np.all(best >= utility.values(others) - q * others - 1e-9)


def test_dual_value_examples(two_users):
    assert dual_value(two_users, np.array([2.0])) == pytest.approx(TWO_USER_OPTIMUM, abs=1e-12)
    assert dual_value(two_users, np.array([1.0])) == pytest.approx(-1.0, abs=1e-12)
    assert dual_value(two_users, np.array([1.0])) > dual_value(two_users, np.array([2.0]))


def test_dual_value_bounds_feasible_utility(two_users):
    utility = eval_utility(two_users, np.array([0.4, 0.4]))
    assert utility == pytest.approx(2.0 * math.log(0.4))
    for lam in np.linspace(0.0, 10.0, 41):
        assert dual_value(two_users, np.array([lam])) >= utility - 1e-9


def test_dual_subgradient_examples(two_users):
    np.testing.assert_allclose(dual_subgradient(two_users, np.array([2.0])), [0.0], atol=1e-15)
    np.testing.assert_allclose(dual_subgradient(two_users, np.array([1.0])), [-1.0])


@pytest.mark.parametrize("utility", [
    UtilitySpec(kind="log"),
    UtilitySpec(kind="weighted_log", weights=[0.5, 2.0, 1.5]),
    UtilitySpec(kind="power", alpha=0.5),
    UtilitySpec(kind="power", alpha=2.0),
])
def test_dual_subgradient_matches_finite_differences(utility, rng):
    # prices >= 0.5 keep every best response below the rate cap, where phi is smooth
    problem = make_problem(2, 3, [[0, 1], [1, 2]], [1.0, 1.0], utility)
    h = 1e-6
    for _ in range(100):
        lam = rng.uniform(0.5, 2.0, size=2)
        grad = dual_subgradient(problem, lam)
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            fd = (dual_value(problem, lam + e) - dual_value(problem, lam - e)) / (2 * h)
            assert fd == pytest.approx(grad[j], rel=1e-5, abs=1e-7)


def test_dual_is_convex(chain, rng):
    for _ in range(100):
        a, b = rng.uniform(0.0, 3.0, size=(2, 2))
        mid = dual_value(chain, 0.5 * (a + b))
        assert mid <= 0.5 * (dual_value(chain, a) + dual_value(chain, b)) + 1e-9


def test_subgradient_inequality(chain, rng):
    for _ in range(100):
        lam, other = rng.uniform(0.01, 3.0, size=(2, 2))
        g = dual_subgradient(chain, lam)
        assert dual_value(chain, other) >= dual_value(chain, lam) + g @ (other - lam) - 1e-9


def test_duality_gap(two_users, rng):
    assert duality_gap(two_users, np.array([0.5, 0.5]), np.array([2.0])) == pytest.approx(0.0, abs=1e-9)
    for _ in range(100):
        x = rng.uniform(1e-3, 0.5, size=2)
        lam = rng.uniform(0.0, 5.0, size=1)
        assert duality_gap(two_users, x, lam) >= -1e-9


def test_lipschitz_bound(two_users):
    # ||b|| + M_g * sqrt(n) * x_max = 1 + sqrt(2) * sqrt(2) * 10
    assert DualOracle(two_users).lipschitz_bound() == pytest.approx(21.0)
