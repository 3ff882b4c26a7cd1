"""Problem core: instance model, utilities, oracles and instance files."""

from app.services.problem.model import NumProblem, RoutingMatrix
from app.services.problem.oracles import (
    constraint_values,
    default_theta0,
    eval_constraint,
    eval_objective,
    eval_utility,
    find_violated,
    grad_objective,
    max_violation,
    objective_lipschitz_bound,
    shift_is_feasible,
    violation_norm,
)
from app.services.problem.io import dumps_problem, load_problem, loads_problem, save_problem

__all__ = [
    "NumProblem",
    "RoutingMatrix",
    "constraint_values",
    "default_theta0",
    "eval_constraint",
    "eval_objective",
    "eval_utility",
    "find_violated",
    "grad_objective",
    "max_violation",
    "objective_lipschitz_bound",
    "shift_is_feasible",
    "violation_norm",
    "dumps_problem",
    "load_problem",
    "loads_problem",
    "save_problem",
]
