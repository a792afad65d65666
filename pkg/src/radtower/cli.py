"""Thin command-line client over the service layer.

Problem files in, reports out.  By default the commands run in-process
(deterministic: identical file and seed give byte-identical --json
output); `--server URL` sends the same request to a running API instance.

Exit codes: 0 success, 1 computation failure or no-answer-with-failure,
2 input error.
"""

from __future__ import annotations

import json
import sys
from typing import Optional

import click

from .service import (
    CommandReport,
    ComputationFailure,
    InputError,
    ProblemRequest,
    run_command,
)


@click.group()
def main():
    """Radical parametrizations: implicitize, trace, reparametrize, integrate."""


def _common(fn):
    fn = click.argument("problem_file", type=click.Path(exists=False))(fn)
    for dec in (
        click.option("--seed", type=int, default=None, help="random seed (u64)"),
        click.option("--tol", type=float, default=None, help="numeric tolerance"),
        click.option("--samples", type=int, default=None, help="witness sample count"),
        click.option("--gb-budget", type=int, default=None, help="pair-reduction budget"),
        click.option("--json", "as_json", is_flag=True, help="machine-readable output"),
        click.option("--timings", is_flag=True, help="include timings (breaks byte-identical output)"),
        click.option("--server", default=None, help="POST to a running service instead"),
    ):
        fn = dec(fn)
    return fn


def _read_problem(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(2)


def _execute(command: str, problem_file: str, seed, tol, samples, gb_budget,
             as_json: bool, timings: bool, server: Optional[str]):
    text = _read_problem(problem_file)
    req = ProblemRequest(
        problem=text, seed=seed, tol=tol, samples=samples,
        gb_budget=gb_budget, timings=timings,
    )
    if server is not None:
        report = _remote(command, req, server)
    else:
        try:
            report = run_command(command, req)
        except InputError as exc:
            click.echo(f"input error: {exc}", err=True)
            sys.exit(2)
        except ComputationFailure as exc:
            click.echo(f"computation failed: {exc}", err=True)
            sys.exit(1)
    _emit(report, as_json)
    if report.flags.get("status") != "ok":
        sys.exit(1)


def _remote(command: str, req: ProblemRequest, server: str) -> CommandReport:
    import httpx

    endpoint = command.replace("_", "-")
    url = server.rstrip("/") + "/" + endpoint
    resp = httpx.post(url, json=req.model_dump(), timeout=600.0)
    if resp.status_code == 422:
        detail = resp.json().get("detail", resp.text)
        click.echo(f"input error: {detail}", err=True)
        sys.exit(2)
    if resp.status_code != 200:
        click.echo(f"server error {resp.status_code}: {resp.text}", err=True)
        sys.exit(1)
    return CommandReport(**resp.json())


def _emit(report: CommandReport, as_json: bool):
    if as_json:
        click.echo(json.dumps(report.model_dump(), sort_keys=True, indent=2))
        return
    click.echo(f"command: {report.command}")
    for family, gens in report.generators.items():
        click.echo(f"{family} generators ({len(gens)}):")
        for g in gens:
            click.echo(f"  {g}")
    interesting = {k: v for k, v in report.flags.items() if k != "status"}
    if interesting:
        click.echo(f"flags: {interesting}")
    for name, cert in report.certificates.items():
        click.echo(f"{name}:")
        _pp(cert, indent=2)
    if report.residuals:
        click.echo(f"residuals: {report.residuals}")
    if report.timings_ms:
        click.echo(f"timings_ms: {report.timings_ms}")
    click.echo(f"status: {report.flags.get('status', 'ok')}")


def _pp(value, indent: int):
    pad = " " * indent
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)):
                click.echo(f"{pad}{k}:")
                _pp(v, indent + 2)
            else:
                click.echo(f"{pad}{k}: {v}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)):
                _pp(v, indent + 2)
            else:
                click.echo(f"{pad}- {v}")
    else:
        click.echo(f"{pad}{value}")


@main.command()
@_common
def implicitize(problem_file, seed, tol, samples, gb_budget, as_json, timings, server):
    """Equations of the incidence component and the radical variety."""
    _execute("implicitize", problem_file, seed, tol, samples, gb_budget,
             as_json, timings, server)


@main.command("tower-variety")
@_common
def tower_variety(problem_file, seed, tol, samples, gb_budget, as_json, timings, server):
    """Equations of the tower variety."""
    _execute("tower_variety", problem_file, seed, tol, samples, gb_budget,
             as_json, timings, server)


@main.command("tracing-index")
@_common
def tracing_index(problem_file, seed, tol, samples, gb_budget, as_json, timings, server):
    """Tracing index, with the inverse map when the index is 1."""
    _execute("tracing_index", problem_file, seed, tol, samples, gb_budget,
             as_json, timings, server)


@main.command()
@_common
def reparametrize(problem_file, seed, tol, samples, gb_budget, as_json, timings, server):
    """Rational reparametrization when the tower variety allows it."""
    _execute("reparametrize", problem_file, seed, tol, samples, gb_budget,
             as_json, timings, server)


@main.command()
@_common
def integrate(problem_file, seed, tol, samples, gb_budget, as_json, timings, server):
    """Rationalizing substitution for a one-variable radical integrand."""
    _execute("integrate", problem_file, seed, tol, samples, gb_budget,
             as_json, timings, server)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8787, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("radtower.api:app", host=host, port=port)


if __name__ == "__main__":
    main()
