"""Problem instance files (JSON, UTF-8)."""

import json
from pathlib import Path
from typing import Union

from pydantic import ValidationError

from app.core.exceptions import InvalidProblemError
from app.models.schemas.problem import ProblemFile
from app.services.problem.model import NumProblem, RoutingMatrix


def problem_from_model(model: ProblemFile) -> NumProblem:
    routing = RoutingMatrix.from_rows(model.m, model.n, model.rows)
    return NumProblem.build(routing, model.b, model.utility, seed=model.seed)


def problem_to_model(problem: NumProblem) -> ProblemFile:
    return ProblemFile(
        n=problem.n,
        m=problem.m,
        rows=[users.tolist() for users in problem.routing.rows],
        b=problem.b.tolist(),
        utility=problem.utility_spec,
        seed=problem.seed,
    )


def dumps_problem(problem: NumProblem) -> str:
    """Canonical serialization; a pure function of the instance."""
    return problem_to_model(problem).model_dump_json(exclude_none=True)


def loads_problem(text: str) -> NumProblem:
    try:
        model = ProblemFile.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "file"
        raise InvalidProblemError(f"{where}: {first['msg']}") from e
    return problem_from_model(model)


def load_problem(path: Union[str, Path]) -> NumProblem:
    with open(path, "r", encoding="utf-8") as f:
        return loads_problem(f.read())


def save_problem(problem: NumProblem, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_problem(problem))
        f.write("\n")


def write_json(payload: dict, path: Union[str, Path]) -> None:
    """Write a result payload with stable key order."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
