"""Benchmark harness: instance generator, KKT oracle, sweep runner and reports."""

from app.services.bench.generator import cell_seed, generate_instance, instance_rng
from app.services.bench.oracle import ReferenceSolution, reference_solution
from app.services.bench.runner import run_bench, run_cell, run_solver
from app.services.bench.report import emit_report, load_records

__all__ = [
    "cell_seed",
    "generate_instance",
    "instance_rng",
    "ReferenceSolution",
    "reference_solution",
    "run_bench",
    "run_cell",
    "run_solver",
    "emit_report",
    "load_records",
]
