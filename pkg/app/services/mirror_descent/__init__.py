from app.services.mirror_descent.report import MdReport, StepTrace
from app.services.mirror_descent.solver import (
    MirrorDescentSolver,
    project,
    run_alg1,
    run_alg2,
    v_f_gap,
)

__all__ = [
    "MdReport",
    "StepTrace",
    "MirrorDescentSolver",
    "project",
    "run_alg1",
    "run_alg2",
    "v_f_gap",
]
