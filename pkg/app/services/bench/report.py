"""Sweep output: csv, json and markdown iteration/time tables."""

import csv
import io
import json
from collections import OrderedDict
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import TypeAdapter

from app.core.exceptions import UsageError
from app.models.schemas.bench import InstanceSpec, ReportFormat, ResultRecord
from app.models.schemas.problem import UtilitySpec
from app.models.schemas.solver import Algorithm, StopReason

CSV_FIELDS = [
    "n", "m", "p", "b_min", "b_max", "seed", "utility_spec",
    "algorithm", "eps", "repetition", "iterations", "wall_time_ms",
    "objective", "utility", "max_violation", "stop_reason", "error",
]

ALGORITHM_LABELS = {Algorithm.MD1: "A1", Algorithm.MD2: "A2", Algorithm.EM: "EM"}

_records_adapter = TypeAdapter(List[ResultRecord])


def _number(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def _optional_float(text: str) -> Optional[float]:
    return float(text) if text != "" else None


def to_csv(records: Sequence[ResultRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({
            "n": r.spec.n,
            "m": r.spec.m,
            "p": repr(r.spec.p),
            "b_min": repr(r.spec.b_min),
            "b_max": repr(r.spec.b_max),
            "seed": r.spec.seed,
            "utility_spec": r.spec.utility.model_dump_json(exclude_none=True),
            "algorithm": r.algorithm.value,
            "eps": repr(r.eps),
            "repetition": r.repetition,
            "iterations": r.iterations,
            "wall_time_ms": repr(r.wall_time_ms),
            "objective": _number(r.objective),
            "utility": _number(r.utility),
            "max_violation": _number(r.max_violation),
            "stop_reason": r.stop_reason.value,
            "error": r.error or "",
        })
    return buffer.getvalue()


def from_csv(text: str) -> List[ResultRecord]:
    records = []
    for row in csv.DictReader(io.StringIO(text)):
        spec = InstanceSpec(
            n=int(row["n"]),
            m=int(row["m"]),
            p=float(row["p"]),
            b_min=float(row["b_min"]),
            b_max=float(row["b_max"]),
            seed=int(row["seed"]),
            utility=UtilitySpec.model_validate_json(row["utility_spec"]),
        )
        records.append(ResultRecord(
            spec=spec,
            algorithm=Algorithm(row["algorithm"]),
            eps=float(row["eps"]),
            repetition=int(row["repetition"]),
            iterations=int(row["iterations"]),
            wall_time_ms=float(row["wall_time_ms"]),
            objective=_optional_float(row["objective"]),
            utility=_optional_float(row["utility"]),
            max_violation=_optional_float(row["max_violation"]),
            stop_reason=StopReason(row["stop_reason"]),
            error=row["error"] or None,
        ))
    return records


def to_json(records: Sequence[ResultRecord]) -> str:
    return json.dumps([r.model_dump(mode="json") for r in records], indent=2) + "\n"


def to_markdown(records: Sequence[ResultRecord]) -> str:
    """One table per eps; columns are (n, m) cells, rows Iter / Time per algorithm."""
    by_eps: Dict[float, List[ResultRecord]] = OrderedDict()
    for r in records:
        by_eps.setdefault(r.eps, []).append(r)

    sections = []
    for eps, group in by_eps.items():
        cells: List[Tuple[int, int]] = list(OrderedDict.fromkeys((r.spec.n, r.spec.m) for r in group))
        algorithms = list(OrderedDict.fromkeys(r.algorithm for r in group))

        lines = [
            f"### eps = {eps:g}",
            "",
            "| | n | " + " | ".join(str(n) for n, _ in cells) + " |",
            "|---|---|" + "---|" * len(cells),
            "| | m | " + " | ".join(str(m) for _, m in cells) + " |",
        ]
        for algorithm in algorithms:
            iters, times = [], []
            for cell in cells:
                runs = [
                    r for r in group
                    if r.algorithm == algorithm and (r.spec.n, r.spec.m) == cell
                ]
                ok = [r for r in runs if r.error is None]
                if not runs:
                    iters.append("-")
                    times.append("-")
                elif not ok:
                    iters.append("err")
                    times.append("err")
                else:
                    iters.append(str(round(sum(r.iterations for r in ok) / len(ok))))
                    times.append(f"{sum(r.wall_time_ms for r in ok) / len(ok) / 1000.0:.2f}")
            label = ALGORITHM_LABELS[algorithm]
            lines.append(f"| {label} | Iter | " + " | ".join(iters) + " |")
            lines.append("| | Time, s | " + " | ".join(times) + " |")
        sections.append("\n".join(lines))
    return "\n\n".join(sections) + "\n"


def emit_report(records: Sequence[ResultRecord], fmt: ReportFormat) -> str:
    if not records:
        raise UsageError("no records to report: the grid is empty or every algorithm is disabled")
    fmt = ReportFormat(fmt)
    if fmt == ReportFormat.CSV:
        return to_csv(records)
    if fmt == ReportFormat.JSON:
        return to_json(records)
    return to_markdown(records)


def load_records(text: str, fmt: ReportFormat) -> List[ResultRecord]:
    fmt = ReportFormat(fmt)
    if fmt == ReportFormat.CSV:
        return from_csv(text)
    if fmt == ReportFormat.JSON:
        return _records_adapter.validate_json(text)
    raise UsageError("markdown reports cannot be loaded back")
