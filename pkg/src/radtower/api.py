"""FastAPI application exposing the command handlers.

POST /implicitize, /tower-variety, /tracing-index, /reparametrize and
/integrate all accept a ProblemRequest body and return the command report.
Input errors map to 422, computation failures (budgets, verification) to
a failed report with HTTP 200 so clients can inspect the reason.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .service import (
    CommandReport,
    ComputationFailure,
    InputError,
    ProblemRequest,
    run_command,
)

app = FastAPI(
    title="radtower",
    version=__version__,
    description=(
        "Exact implicitization, tracing index, reparametrization and "
        "integral rationalization for radical parametrizations."
    ),
)


def _handle(name: str, req: ProblemRequest) -> CommandReport:
    try:
        return run_command(name, req)
    except InputError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except ComputationFailure as exc:
        return CommandReport(
            command=name,
            input_hash="",
            flags={"status": "failed", "error": str(exc)},
        )


@app.get("/healthz")
def healthz():
    return {"status": "ok", "version": __version__}


@app.post("/implicitize", response_model=CommandReport)
def implicitize(req: ProblemRequest):
    return _handle("implicitize", req)


@app.post("/tower-variety", response_model=CommandReport)
def tower_variety(req: ProblemRequest):
    return _handle("tower_variety", req)


@app.post("/tracing-index", response_model=CommandReport)
def tracing_index(req: ProblemRequest):
    return _handle("tracing_index", req)


@app.post("/reparametrize", response_model=CommandReport)
def reparametrize(req: ProblemRequest):
    return _handle("reparametrize", req)


@app.post("/integrate", response_model=CommandReport)
def integrate(req: ProblemRequest):
    return _handle("integrate", req)
