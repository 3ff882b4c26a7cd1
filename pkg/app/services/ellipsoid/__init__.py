"""Dual construction, ellipsoid method and certificate-based primal recovery."""

from app.services.ellipsoid.dual import (
    DualOracle,
    best_response,
    dual_subgradient,
    dual_value,
    duality_gap,
)
from app.services.ellipsoid.certificate import (
    Certificate,
    EmHistory,
    build_certificate,
    recover_primal,
)
from app.services.ellipsoid.method import (
    EllipsoidSolver,
    EllipsoidState,
    EmReport,
    em_budget,
    em_run,
    em_step,
)

__all__ = [
    "DualOracle",
    "best_response",
    "dual_subgradient",
    "dual_value",
    "duality_gap",
    "Certificate",
    "EmHistory",
    "build_certificate",
    "recover_primal",
    "EllipsoidSolver",
    "EllipsoidState",
    "EmReport",
    "em_budget",
    "em_run",
    "em_step",
]
