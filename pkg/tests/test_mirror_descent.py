import math

import numpy as np
import pytest

from app.core.exceptions import ConfigurationError
from app.models.schemas.bench import InstanceSpec
from app.models.schemas.solver import MdConfig, MdMode, StopReason, ViolatedPolicy
from app.services.bench.generator import generate_instance
from app.services.bench.oracle import reference_solution
from app.services.mirror_descent import (
    MirrorDescentSolver,
    project,
    run_alg1,
    run_alg2,
    v_f_gap,
)
from app.services.mirror_descent.solver import LinkScanner
from app.services.problem.oracles import (
    constraint_values,
    eval_objective,
    grad_objective,
    max_violation,
    select_violated,
    shift_is_feasible,
)
from tests.conftest import TWO_USER_OPTIMUM, make_problem


def test_project_examples():
    np.testing.assert_array_equal(project(np.array([-1.0, 2.0]), 0.0), [0.0, 2.0])
    np.testing.assert_array_equal(project(np.array([0.001, 5.0]), 0.01), [0.01, 5.0])
    x = np.array([0.3, 0.7])
    np.testing.assert_array_equal(project(x, 0.1), x)


@pytest.mark.parametrize("eps, horizon", [(0.1, 200), (0.05, 800)])
def test_alg1_standard_runs_exact_horizon(roomy_two_users, eps, horizon):
    config = MdConfig(eps=eps, theta0=1.0, mode=MdMode.STANDARD, start=[1.0, 1.0], trace_every=1)
    report = run_alg1(roomy_two_users, config)

    assert report.total_iters == horizon
    assert report.productive_count == horizon
    assert report.stop_reason == StopReason.CRITERION_MET
    for step in report.trace:
        assert step.step_size * step.grad_norm == pytest.approx(eps, rel=1e-12)


def test_alg1_horizon_quadruples_when_eps_halves(roomy_two_users):
    def horizon(eps):
        config = MdConfig(eps=eps, theta0=1.0, mode=MdMode.STANDARD, start=[1.0, 1.0])
        return MirrorDescentSolver(roomy_two_users, config).alg1_horizon()

    assert horizon(0.05) == 4 * horizon(0.1)
    assert horizon(0.025) == 4 * horizon(0.05)


def test_alg1_log_shift(two_users):
    eps = 0.1
    report = run_alg1(two_users, MdConfig(eps=eps, trace_every=1))

    assert report.total_iters == 20000
    assert report.stop_reason == StopReason.CRITERION_MET
    assert report.productive_count >= 1
    assert report.productive_count + report.unproductive_count == report.total_iters

    # symmetric instance from a symmetric start keeps both rates equal
    assert report.solution[0] == report.solution[1]
    assert report.max_violation <= eps * math.sqrt(2.0) + 1e-12
    assert report.objective <= -TWO_USER_OPTIMUM + eps

    floor = eps * two_users.n
    for step in report.trace:
        assert np.all(step.point >= floor)
        assert step.step_size * step.grad_norm == pytest.approx(eps**2, rel=1e-12)
        if step.productive:
            g = two_users.routing.matrix @ step.point - two_users.b
            assert np.all(g <= eps * two_users.row_norms)


def test_alg1_best_iterate_is_productive_minimum(two_users):
    report = run_alg1(two_users, MdConfig(eps=0.1, trace_every=1))
    productive = [s.objective for s in report.trace if s.productive]
    assert report.objective == min(productive)


def test_alg1_cap_hit(roomy_two_users):
    config = MdConfig(eps=0.1, theta0=1.0, mode=MdMode.STANDARD, start=[1.0, 1.0], max_iters_cap=10)
    report = run_alg1(roomy_two_users, config)
    assert report.total_iters == 10
    assert report.stop_reason == StopReason.CAP_HIT


def test_alg1_no_productive_steps(two_users):
    config = MdConfig(eps=0.1, start=[5.0, 5.0], max_iters_cap=3)
    report = run_alg1(two_users, config)
    assert report.productive_count == 0
    assert report.unproductive_count == 3
    assert report.stop_reason == StopReason.NO_PRODUCTIVE_STEPS


def test_standard_mode_needs_positive_start(two_users):
    with pytest.raises(ConfigurationError):
        run_alg2(two_users, MdConfig(eps=0.1, mode=MdMode.STANDARD))


def test_start_length_is_checked(two_users):
    with pytest.raises(ConfigurationError):
        run_alg2(two_users, MdConfig(eps=0.1, start=[1.0]))


@pytest.mark.parametrize("eps", [0.1, 0.02])
def test_alg2_log_shift_guarantees(two_users, eps):
    report = run_alg2(two_users, MdConfig(eps=eps))

    assert report.stop_reason == StopReason.CRITERION_MET
    assert report.productive_count >= 1
    assert report.max_violation <= eps * two_users.M_g + 1e-12
    assert eval_objective(two_users, report.solution) - (-TWO_USER_OPTIMUM) <= eps + 1e-9
    assert abs(report.utility - TWO_USER_OPTIMUM) <= max(2 * eps, 0.02) + eps

    solver = MirrorDescentSolver(two_users, MdConfig(eps=eps))
    assert report.score >= solver.alg2_target()
    assert report.total_iters <= math.ceil(solver.alg2_target() * max(1.0, report.max_grad_norm**2))


def test_alg2_averaging_identity_and_step_law(two_users):
    eps = 0.1
    report = run_alg2(two_users, MdConfig(eps=eps, trace_every=1))

    productive = [s for s in report.trace if s.productive]
    assert len(productive) == report.productive_count
    weights = np.array([s.step_size for s in productive])
    points = np.array([s.point for s in productive])
    average = weights @ points / weights.sum()
    np.testing.assert_allclose(report.solution, average, rtol=1e-10)

    for step in report.trace:
        if step.productive:
            assert step.step_size * step.grad_norm**2 == pytest.approx(eps, rel=1e-12)
        else:
            assert step.step_size * step.grad_norm == pytest.approx(eps, rel=1e-12)


def test_alg2_all_productive_path(roomy_two_users):
    eps = 0.1
    config = MdConfig(eps=eps, theta0=0.5, mode=MdMode.STANDARD, start=[1.0, 1.0], trace_every=1)
    report = run_alg2(roomy_two_users, config)

    target = 2 * 0.5**2 / eps**2
    assert report.unproductive_count == 0
    assert report.stop_reason == StopReason.CRITERION_MET
    scores = [1.0 / s.grad_norm**2 for s in report.trace]
    assert sum(scores) >= target
    assert sum(scores[:-1]) < target


def test_runs_are_deterministic(chain):
    config = MdConfig(eps=0.05, theta0=0.5)
    first, second = run_alg2(chain, config), run_alg2(chain, config)
    assert first.total_iters == second.total_iters
    np.testing.assert_array_equal(first.solution, second.solution)

    first, second = run_alg1(chain, MdConfig(eps=0.2, theta0=0.2)), run_alg1(chain, MdConfig(eps=0.2, theta0=0.2))
    np.testing.assert_array_equal(first.solution, second.solution)


def test_v_f_gap_examples(two_users, rng):
    xstar = np.array([0.5, 0.5])
    assert v_f_gap(two_users, xstar, xstar) == 0.0
    assert v_f_gap(two_users, np.array([1.0, 1.0]), xstar) == pytest.approx(-1.0 / math.sqrt(2.0))

    f_star = eval_objective(two_users, xstar)
    for _ in range(100):
        y = rng.uniform(0.05, 3.0, size=2)
        norm = np.linalg.norm(grad_objective(two_users, y))
        assert v_f_gap(two_users, y, xstar) >= (eval_objective(two_users, y) - f_star) / norm - 1e-12


def _oracle_instance(seed, n, m):
    return generate_instance(InstanceSpec(n=n, m=m, b_min=0.5, b_max=1.5, seed=seed))


ORACLE_FAMILY = [(seed, 2 + seed % 4, 1 + (seed // 4) % 3) for seed in range(24)]


@pytest.mark.parametrize("seed, n, m", ORACLE_FAMILY)
def test_alg2_agrees_with_reference_oracle(seed, n, m):
    # eps = 0.4 / n^2 instead of 1e-3 keeps each run around a second. It also
    # keeps the floor eps*n below b_min / n <= x*_k, and eps*n*|row| <= 0.4 < b.
    problem = _oracle_instance(seed, n, m)
    ref = reference_solution(problem)
    eps = 0.4 / n**2
    assert shift_is_feasible(problem, eps)
    assert ref.x.min() >= eps * n

    report = run_alg2(problem, MdConfig(eps=eps))

    assert report.stop_reason == StopReason.CRITERION_MET
    assert ref.utility - report.utility <= 5 * eps
    assert max_violation(problem, report.solution) <= eps * problem.M_g + 1e-12


@pytest.mark.parametrize("seed, m", [(seed, 1 + seed % 3) for seed in range(6)])
def test_alg1_agrees_with_reference_oracle(seed, m):
    # n = 2 and eps = 0.1 instead of 1e-2: the shifted horizon grows as eps^-4
    problem = _oracle_instance(seed, 2, m)
    ref = reference_solution(problem)
    eps = 0.1
    assert shift_is_feasible(problem, eps)
    assert ref.x.min() >= eps * problem.n

    report = run_alg1(problem, MdConfig(eps=eps, trace_every=1))

    assert report.stop_reason == StopReason.CRITERION_MET
    assert report.productive_count >= 1
    assert report.objective - (-ref.utility) <= eps
    thresholds = eps * problem.row_norms
    for step in report.trace:
        if step.productive:
            assert np.all(constraint_values(problem, step.point) <= thresholds)


STOP_RULE_FAMILY = [(seed, 2 + seed % 4, 1 + seed % 3) for seed in range(20)]


def _roomy_instance(seed, n, m):
    # capacities far above any rate reached from x^0 = 1 in these runs
    return generate_instance(InstanceSpec(n=n, m=m, b_min=100.0, b_max=200.0, seed=seed))


@pytest.mark.parametrize("seed, n, m", STOP_RULE_FAMILY)
def test_alg1_standard_horizon_on_many_instances(seed, n, m):
    problem = _roomy_instance(seed, n, m)
    config = MdConfig(eps=0.1, theta0=1.0, mode=MdMode.STANDARD, start=[1.0] * n)
    report = run_alg1(problem, config)
    assert report.total_iters == 200
    assert report.stop_reason == StopReason.CRITERION_MET


@pytest.mark.parametrize("seed, n, m", STOP_RULE_FAMILY)
def test_alg2_stops_at_first_crossing_on_many_instances(seed, n, m):
    problem = _roomy_instance(seed, n, m)
    config = MdConfig(eps=0.1, theta0=1.0, mode=MdMode.STANDARD, start=[1.0] * n, trace_every=1)
    report = run_alg2(problem, config)
    target = MirrorDescentSolver(problem, config).alg2_target()

    scores = [1.0 / s.grad_norm**2 if s.productive else 1.0 for s in report.trace]
    assert report.stop_reason == StopReason.CRITERION_MET
    assert len(scores) == report.total_iters
    assert sum(scores) >= target - 1e-9
    assert sum(scores[:-1]) < target + 1e-9
    assert report.total_iters <= math.ceil(target * max(1.0, report.max_grad_norm**2))


@pytest.mark.parametrize("policy", list(ViolatedPolicy))
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_link_scanner_matches_select_violated(policy, seed, rng):
    problem = generate_instance(InstanceSpec(n=6, m=5, seed=seed))
    thresholds = 0.01 * problem.row_norms
    scanner = LinkScanner(problem, thresholds, policy)
    for _ in range(200):
        x = rng.uniform(0.0, 0.2, size=problem.n)
        expected = select_violated(constraint_values(problem, x), thresholds, policy)
        assert scanner.violated(x) == expected


def test_link_scanner_skips_empty_rows():
    problem = make_problem(2, 2, [[0, 1], []], [1.0, 1.0])
    scanner = LinkScanner(problem, 0.1 * problem.row_norms, ViolatedPolicy.FIRST)
    assert scanner.violated(np.array([2.0, 2.0])) == 0
    assert scanner.violated(np.array([0.1, 0.1])) is None
