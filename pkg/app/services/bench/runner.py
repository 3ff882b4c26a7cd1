"""Benchmark sweep: generate each grid cell, run and time every enabled solver."""

from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Tuple

from loguru import logger

from app.core.config import get_settings
from app.core.exceptions import NoProductiveStepsError, NumError
from app.models.schemas.bench import BenchConfig, GridCell, InstanceSpec, ResultRecord
from app.models.schemas.solver import Algorithm, EmConfig, MdConfig, StopReason
from app.services.bench.generator import cell_seed, generate_instance
from app.services.ellipsoid.method import em_run
from app.services.mirror_descent.solver import run_alg1, run_alg2
from app.services.problem.model import NumProblem

Task = Tuple[BenchConfig, GridCell, int]


def instance_spec_for(config: BenchConfig, cell: GridCell, repetition: int) -> InstanceSpec:
    return InstanceSpec(
        n=cell.n,
        m=cell.m,
        p=config.p,
        b_min=config.b_min,
        b_max=config.b_max,
        utility=config.utility,
        seed=cell_seed(config.seed, cell.n, cell.m, repetition),
    )


def run_solver(
    problem: NumProblem,
    algorithm: Algorithm,
    eps: float,
    config: BenchConfig,
    spec: InstanceSpec,
    repetition: int = 0,
) -> ResultRecord:
    """Run one solver on one instance; failures become the record's error."""
    base = dict(spec=spec, algorithm=algorithm, eps=eps, repetition=repetition)
    try:
        if algorithm == Algorithm.EM:
            em = config.em
            report = em_run(problem, EmConfig(
                eps=eps,
                radius=em.radius,
                M=em.M,
                direction=em.direction,
                certificate_policy=em.certificate_policy,
                max_iters=em.max_iters,
            ))
            return ResultRecord(
                **base,
                iterations=report.iterations,
                wall_time_ms=report.wall_time * 1000.0,
                objective=-report.primal_utility,
                utility=report.primal_utility,
                max_violation=report.max_violation,
                stop_reason=report.stop_reason,
            )

        settings = config.md1 if algorithm == Algorithm.MD1 else config.md2
        start = None if settings.start_value is None else [settings.start_value] * problem.n
        md_config = MdConfig(
            eps=eps,
            theta0=settings.theta0,
            mode=settings.mode,
            start=start,
            max_iters_cap=settings.max_iters_cap,
        )
        run = run_alg1 if algorithm == Algorithm.MD1 else run_alg2
        report = run(problem, md_config)
        return ResultRecord(
            **base,
            iterations=report.total_iters,
            wall_time_ms=report.wall_time * 1000.0,
            objective=report.objective,
            utility=report.utility,
            max_violation=report.max_violation,
            stop_reason=report.stop_reason,
        )
    except NumError as e:
        logger.error("{} failed on n={} m={} seed={}: {}", algorithm.value, spec.n, spec.m, spec.seed, e)
        stop = (
            StopReason.NO_PRODUCTIVE_STEPS
            if isinstance(e, NoProductiveStepsError)
            else StopReason.ERROR
        )
        return ResultRecord(**base, stop_reason=stop, error=str(e))


def run_cell(task: Task) -> List[ResultRecord]:
    config, cell, repetition = task
    spec = instance_spec_for(config, cell, repetition)
    algorithms = config.enabled_algorithms()
    try:
        problem = generate_instance(spec)
    except NumError as e:
        logger.error("instance generation failed for n={} m={} seed={}: {}", spec.n, spec.m, spec.seed, e)
        return [
            ResultRecord(spec=spec, algorithm=a, eps=cell.eps, repetition=repetition,
                         stop_reason=StopReason.ERROR, error=str(e))
            for a in algorithms
        ]
    return [run_solver(problem, a, cell.eps, config, spec, repetition) for a in algorithms]


def run_bench(config: BenchConfig, parallel: Optional[int] = None) -> List[ResultRecord]:
    """Run every (cell, repetition); records come back in grid order."""
    parallel = parallel or get_settings().BENCH_PARALLEL
    tasks: List[Task] = [
        (config, cell, repetition)
        for cell in config.grid
        for repetition in range(config.repetitions)
    ]
    logger.info(
        "bench: {} cells x {} repetitions, algorithms={}, parallel={}",
        len(config.grid), config.repetitions,
        [a.value for a in config.enabled_algorithms()], parallel,
    )

    if parallel > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as executor:
            batches = list(executor.map(run_cell, tasks))
    else:
        batches = [run_cell(task) for task in tasks]
    return [record for batch in batches for record in batch]
