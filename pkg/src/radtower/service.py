"""Service layer: the command handlers behind both the HTTP API and the CLI.

Requests carry the problem-file text plus optional overrides; reports use
the machine-readable schema (command, input_hash, generators, flags,
certificates, residuals, timings_ms).  All randomness flows from the one
resolved seed.  `timings_ms` is null unless timings are explicitly
requested, keeping default reports byte-identical for a fixed input and
seed.
"""

from __future__ import annotations

import hashlib
import time
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from . import build as build_mod
from .build import build_integrand, build_parametrization
from .groebner import BudgetExceeded
from .integrate import IntegrateError, rationalize_integral, verify_transform
from .problemfile import ProblemFile, ProblemFileError, parse_problem_file
from .reparam import ReparamError, reparametrize
from .tower import TowerError
from .tracing import TracingError, tracing_index
from .varieties import VarietyError, variety_report


class InputError(ValueError):
    """Problem text not processable (exit code 2 territory)."""


class ComputationFailure(RuntimeError):
    """Budget exhausted or a verified computation failed (exit code 1)."""


class ProblemRequest(BaseModel):
    problem: str
    seed: Optional[int] = Field(default=None, ge=0)
    tol: Optional[float] = Field(default=None, gt=0, le=1e-2)
    samples: Optional[int] = Field(default=None, ge=1, le=200)
    gb_budget: Optional[int] = Field(default=None, ge=100, le=10**9)
    timings: bool = False


class CommandReport(BaseModel):
    command: str
    input_hash: str
    generators: Dict[str, List[str]] = Field(default_factory=dict)
    flags: Dict[str, object] = Field(default_factory=dict)
    certificates: Dict[str, object] = Field(default_factory=dict)
    residuals: Dict[str, object] = Field(default_factory=dict)
    timings_ms: Optional[Dict[str, int]] = None


def _resolve(req: ProblemRequest):
    try:
        pf = parse_problem_file(req.problem)
    except ProblemFileError as exc:
        raise InputError(str(exc))
    seed = req.seed if req.seed is not None else pf.options.get("seed", None)
    if seed is None:
        import os

        env = os.environ.get("RADTOWER_SEED")
        seed = int(env) if env and env.isdigit() else 0
    tol = req.tol if req.tol is not None else pf.options.get("tol", 1e-8)
    samples = req.samples if req.samples is not None else pf.options.get("samples", 8)
    budget = (
        req.gb_budget if req.gb_budget is not None else pf.options.get("gb_budget", 200_000)
    )
    return pf, int(seed), float(tol), int(samples), int(budget)


def _hash(req: ProblemRequest) -> str:
    return hashlib.sha256(req.problem.encode("utf-8")).hexdigest()


def _build(pf: ProblemFile, seed: int, tol: float):
    try:
        return build_parametrization(
            pf.components, pf.params, pf.base_point, pf.branch_values,
            tol=tol, seed=seed,
        )
    except (build_mod.BuildError, ProblemFileError) as exc:
        raise InputError(str(exc))
    except TowerError as exc:
        raise InputError(f"branch or tower rejected: {exc}")


def _variety_stage(P, seed, samples, tol, budget, include_tower=True):
    try:
        return variety_report(
            P, seed=seed, samples=samples, tol=max(tol, 1e-6), step_budget=budget,
            include_tower=include_tower,
        )
    except BudgetExceeded as exc:
        raise ComputationFailure(str(exc))
    except (VarietyError, TowerError) as exc:
        raise ComputationFailure(str(exc))


class _Timer:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.marks: Dict[str, int] = {}
        self._t0 = time.perf_counter()

    def mark(self, name: str):
        if self.enabled:
            t1 = time.perf_counter()
            self.marks[name] = int((t1 - self._t0) * 1000)
            self._t0 = t1

    def result(self) -> Optional[Dict[str, int]]:
        return self.marks if self.enabled else None


def run_implicitize(req: ProblemRequest) -> CommandReport:
    pf, seed, tol, samples, budget = _resolve(req)
    timer = _Timer(req.timings)
    if pf.integrand is not None:
        raise InputError("implicitize expects [param] components")
    P = _build(pf, seed, tol)
    timer.mark("build")
    report = _variety_stage(P, seed, samples, tol, budget, include_tower=False)
    timer.mark("implicitize")
    rendered = report.rendered()
    return CommandReport(
        command="implicitize",
        input_hash=_hash(req),
        generators={
            "auxiliary": rendered["auxiliary"],
            "incidence": rendered["incidence"],
            "radical_variety": rendered["radical_variety"],
        },
        flags={"status": "ok", **report.flags},
        certificates={"combinations_examined": report.combinations_examined},
        residuals=report.residuals,
        timings_ms=timer.result(),
    )


def run_tower_variety(req: ProblemRequest) -> CommandReport:
    pf, seed, tol, samples, budget = _resolve(req)
    timer = _Timer(req.timings)
    if pf.integrand is not None:
        raise InputError("tower-variety expects [param] components")
    P = _build(pf, seed, tol)
    report = _variety_stage(P, seed, samples, tol, budget)
    timer.mark("tower_variety")
    rendered = report.rendered()
    return CommandReport(
        command="tower_variety",
        input_hash=_hash(req),
        generators={
            "incidence": rendered["incidence"],
            "tower_variety": rendered["tower_variety"],
        },
        flags={"status": "ok", **report.flags},
        residuals=report.residuals,
        timings_ms=timer.result(),
    )


def run_tracing_index(req: ProblemRequest) -> CommandReport:
    pf, seed, tol, samples, budget = _resolve(req)
    timer = _Timer(req.timings)
    if pf.integrand is not None:
        raise InputError("tracing-index expects [param] components")
    P = _build(pf, seed, tol)
    report = _variety_stage(P, seed, samples, tol, budget, include_tower=False)
    try:
        cert = tracing_index(P, report, seed=seed, step_budget=budget)
    except BudgetExceeded as exc:
        raise ComputationFailure(str(exc))
    except TracingError as exc:
        raise ComputationFailure(str(exc))
    timer.mark("tracing")
    return CommandReport(
        command="tracing_index",
        input_hash=_hash(req),
        generators={"radical_variety": report.rendered()["radical_variety"]},
        flags={"status": "ok", **report.flags},
        certificates={"tracing": cert.rendered()},
        residuals=report.residuals,
        timings_ms=timer.result(),
    )


def run_reparametrize(req: ProblemRequest) -> CommandReport:
    pf, seed, tol, samples, budget = _resolve(req)
    timer = _Timer(req.timings)
    if pf.integrand is not None:
        raise InputError("reparametrize expects [param] components")
    P = _build(pf, seed, tol)
    report = _variety_stage(P, seed, samples, tol, budget)
    try:
        outcome = reparametrize(P, report, seed=seed, step_budget=budget)
    except BudgetExceeded as exc:
        raise ComputationFailure(str(exc))
    except (ReparamError, TracingError) as exc:
        raise ComputationFailure(str(exc))
    timer.mark("reparametrize")
    return CommandReport(
        command="reparametrize",
        input_hash=_hash(req),
        generators={
            "radical_variety": report.rendered()["radical_variety"],
            "tower_variety": report.rendered()["tower_variety"],
        },
        flags={"status": "ok", "outcome": outcome.kind, **report.flags},
        certificates={"reparametrization": outcome.rendered()},
        residuals=report.residuals,
        timings_ms=timer.result(),
    )


def run_integrate(req: ProblemRequest) -> CommandReport:
    pf, seed, tol, samples, budget = _resolve(req)
    timer = _Timer(req.timings)
    if pf.integrand is None:
        raise InputError("integrate expects an [integrand] section")
    try:
        f, aux = build_integrand(
            pf.integrand, pf.params[0], pf.base_point, pf.branch_values,
            tol=tol, seed=seed,
        )
    except (build_mod.BuildError, ProblemFileError) as exc:
        raise InputError(str(exc))
    except TowerError as exc:
        raise InputError(f"branch or tower rejected: {exc}")
    try:
        transform = rationalize_integral(f, aux, seed=seed, samples=samples,
                                         step_budget=budget)
        verification = verify_transform(transform, f, seed=seed)
    except BudgetExceeded as exc:
        raise ComputationFailure(str(exc))
    except (IntegrateError, VarietyError, ReparamError, TowerError) as exc:
        raise ComputationFailure(str(exc))
    timer.mark("integrate")
    if not verification["ok"]:
        raise ComputationFailure(f"transform verification failed: {verification}")
    return CommandReport(
        command="integrate",
        input_hash=_hash(req),
        flags={"status": "ok"},
        certificates={"integral_transform": transform.rendered()},
        residuals=verification,
        timings_ms=timer.result(),
    )


COMMANDS = {
    "implicitize": run_implicitize,
    "tower_variety": run_tower_variety,
    "tracing_index": run_tracing_index,
    "reparametrize": run_reparametrize,
    "integrate": run_integrate,
}


def run_command(name: str, req: ProblemRequest) -> CommandReport:
    try:
        handler = COMMANDS[name]
    except KeyError:
        raise InputError(f"unknown command {name!r}")
    return handler(req)
