"""``num`` command line: generate instances, solve them, run sweeps, query the oracle."""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger
from pydantic import ValidationError

from app.core.config import get_settings
from app.core.exceptions import (
    EXIT_INVALID_INPUT,
    EXIT_OK,
    EXIT_SOLVER_INCOMPLETE,
    NumError,
)
from app.core.logging import configure_logging
from app.models.schemas.bench import BenchConfig, InstanceSpec, ReportFormat
from app.models.schemas.problem import UtilityKind, UtilitySpec
from app.models.schemas.solver import (
    Algorithm,
    EmConfig,
    EmDirection,
    EmSolveResult,
    MdConfig,
    MdMode,
    StopReason,
)
from app.services.bench.generator import generate_instance
from app.services.bench.oracle import reference_solution
from app.services.bench.report import emit_report
from app.services.bench.runner import run_bench
from app.services.ellipsoid.method import em_run
from app.services.mirror_descent.solver import run_alg1, run_alg2
from app.services.problem.io import load_problem, save_problem, write_json

INCOMPLETE = {StopReason.CAP_HIT, StopReason.NO_PRODUCTIVE_STEPS}


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="num",
        description=f"{settings.APP_NAME}: network utility maximization solvers and benchmark harness",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="loguru level for stderr")
    parser.add_argument("--log-format", choices=["text", "json"], default=settings.LOG_FORMAT)
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="generate a seeded random instance")
    gen.add_argument("--n", type=int, required=True, help="number of users")
    gen.add_argument("--m", type=int, required=True, help="number of links")
    gen.add_argument("--p", type=float, default=0.5, help="routing density")
    gen.add_argument("--b-min", type=float, default=0.1)
    gen.add_argument("--b-max", type=float, default=0.4)
    gen.add_argument("--utility", choices=[k.value for k in UtilityKind], default="log")
    gen.add_argument("--weights", type=float, nargs="+", help="per-user weights for weighted_log")
    gen.add_argument("--alpha", type=float, help="fairness parameter for power")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, required=True)

    solve = commands.add_parser("solve", help="run one solver on an instance file")
    solve.add_argument("--algo", choices=[a.value for a in Algorithm], required=True)
    solve.add_argument("--problem", type=Path, required=True)
    solve.add_argument("--eps", type=float, required=True)
    solve.add_argument("--theta0", type=float, help="mirror-descent distance bound")
    solve.add_argument("--radius", type=float, help="ellipsoid dual radius R")
    solve.add_argument("--mode", choices=["standard", "log-shift"], default="log-shift")
    solve.add_argument("--start-value", type=float, help="initial rate for every user (mirror descent)")
    solve.add_argument("--em-direction", choices=[d.value for d in EmDirection], default="standard")
    solve.add_argument("--max-iters", type=int, help="hard iteration cap")
    solve.add_argument("--out", type=Path, required=True)

    bench = commands.add_parser("bench", help="run a sweep from a JSON config")
    bench.add_argument("--config", type=Path, required=True)
    bench.add_argument("--format", choices=[f.value for f in ReportFormat], help="overrides the config")
    bench.add_argument("--parallel", type=int, default=settings.BENCH_PARALLEL)
    bench.add_argument("--out", type=Path, required=True)

    oracle = commands.add_parser("oracle", help="KKT reference solution of a tiny instance")
    oracle.add_argument("--problem", type=Path, required=True)
    oracle.add_argument("--out", type=Path, required=True)
    return parser


def _utility_spec(args: argparse.Namespace) -> UtilitySpec:
    return UtilitySpec(kind=UtilityKind(args.utility), weights=args.weights, alpha=args.alpha)


def cmd_gen(args: argparse.Namespace) -> int:
    spec = InstanceSpec(
        n=args.n,
        m=args.m,
        p=args.p,
        b_min=args.b_min,
        b_max=args.b_max,
        utility=_utility_spec(args),
        seed=args.seed,
    )
    problem = generate_instance(spec)
    save_problem(problem, args.out)
    logger.info("wrote instance n={} m={} seed={} to {}", spec.n, spec.m, spec.seed, args.out)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    algorithm = Algorithm(args.algo)

    if algorithm == Algorithm.EM:
        report = em_run(problem, EmConfig(
            eps=args.eps,
            radius=args.radius,
            max_iters=args.max_iters,
            direction=EmDirection(args.em_direction),
        ))
        result = EmSolveResult(
            algorithm=algorithm,
            eps=args.eps,
            iters=report.iterations,
            productive=report.productive_count,
            unproductive=report.iterations - report.productive_count,
            objective=-report.primal_utility,
            utility=report.primal_utility,
            max_violation=report.max_violation,
            wall_time_ms=report.wall_time * 1000.0,
            stop_reason=report.stop_reason,
            solution=report.recovered_x.tolist(),
            radius=report.radius,
            direction=EmDirection(args.em_direction),
            lam=report.lambda_final.tolist(),
            dual_value=report.dual_value,
            gap=report.gap,
            violation_norm=report.violation_norm,
            certificate_support=report.certificate.support,
        )
    else:
        start = None if args.start_value is None else [args.start_value] * problem.n
        config = MdConfig(
            eps=args.eps,
            theta0=args.theta0,
            mode=MdMode(args.mode.replace("-", "_")),
            start=start,
            max_iters_cap=args.max_iters,
        )
        run = run_alg1 if algorithm == Algorithm.MD1 else run_alg2
        result = run(problem, config).to_result()

    write_json(result.model_dump(mode="json", by_alias=True), args.out)
    if result.stop_reason in INCOMPLETE:
        logger.warning("{} stopped with {}; result written to {}", algorithm.value,
                       result.stop_reason.value, args.out)
        return EXIT_SOLVER_INCOMPLETE
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    config = BenchConfig.model_validate_json(Path(args.config).read_text(encoding="utf-8"))
    fmt = ReportFormat(args.format) if args.format else config.format
    records = run_bench(config, parallel=args.parallel)
    text = emit_report(records, fmt)
    Path(args.out).write_text(text, encoding="utf-8")
    failed = sum(1 for r in records if r.error is not None)
    if failed:
        logger.warning("{} of {} runs failed; see the error column", failed, len(records))
    logger.info("wrote {} records as {} to {}", len(records), fmt.value, args.out)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    ref = reference_solution(problem)
    write_json(
        {
            "x": ref.x.tolist(),
            "lambda": ref.lam.tolist(),
            "utility": ref.utility,
            "objective": -ref.utility,
            "active": list(ref.active),
        },
        args.out,
    )
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "bench": cmd_bench,
    "oracle": cmd_oracle,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_format)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        logger.error("invalid input: {}", e)
        return EXIT_INVALID_INPUT
    except NumError as e:
        logger.error("{}: {}", type(e).__name__, e)
        return e.exit_code
    except OSError as e:
        logger.error("{}", e)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
