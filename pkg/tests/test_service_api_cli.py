import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from radtower.api import app
from radtower.cli import main as cli_main
from radtower.service import (
    ComputationFailure,
    InputError,
    ProblemRequest,
    run_command,
)

from .conftest import read_problem


client = TestClient(app)


# -- service layer ---------------------------------------------------------------


def test_run_implicitize_circle():
    rep = run_command("implicitize", ProblemRequest(problem=read_problem("circle.rad")))
    assert rep.command == "implicitize"
    assert rep.generators["radical_variety"] == ["x1^2+x2^2-1"]
    assert rep.flags["status"] == "ok"
    assert rep.timings_ms is None


def test_run_tower_variety():
    rep = run_command(
        "tower_variety", ProblemRequest(problem=read_problem("surface48.rad"))
    )
    assert rep.generators["tower_variety"] == ["d1^2-2*t1-2*t2"]


def test_run_tracing_index():
    rep = run_command(
        "tracing_index", ProblemRequest(problem=read_problem("parabola_shifted.rad"))
    )
    assert rep.certificates["tracing"]["index"] == 2


def test_run_reparametrize_no_answer():
    rep = run_command(
        "reparametrize", ProblemRequest(problem=read_problem("fermat3.rad"))
    )
    assert rep.flags["outcome"] == "no_answer"
    assert rep.certificates["reparametrization"]["evidence"]["tracing_index"] == 3


def test_run_integrate():
    rep = run_command("integrate", ProblemRequest(problem=read_problem("euler_integral.rad")))
    cert = rep.certificates["integral_transform"]
    assert cert["back_substitution"] == "-t+d1"
    assert rep.residuals["ok"] is True


def test_run_tower_variety_two_generators():
    rep = run_command(
        "tower_variety", ProblemRequest(problem=read_problem("circle_cubicroot.rad"))
    )
    gens = rep.generators["tower_variety"]
    assert len(gens) == 2
    assert any("d1^3" in g for g in gens)


def test_run_tower_variety_rational_is_empty():
    rep = run_command(
        "tower_variety", ProblemRequest(problem=read_problem("twisted_pair.rad"))
    )
    assert rep.generators["tower_variety"] == []


def test_run_tracing_surface_inverse_map():
    rep = run_command(
        "tracing_index", ProblemRequest(problem=read_problem("surface35.rad"))
    )
    cert = rep.certificates["tracing"]
    assert cert["index"] == 1 and cert["method"] == "generic_fiber"
    assert len(cert["inverse_map"]) == 3


def test_run_reparametrize_examples():
    for name in ("circle_cubicroot.rad", "surface48.rad", "monoid412.rad"):
        rep = run_command("reparametrize", ProblemRequest(problem=read_problem(name)))
        assert rep.flags["outcome"] == "reparametrized", name


def test_run_reparametrize_not_rational():
    rep = run_command(
        "reparametrize", ProblemRequest(problem=read_problem("elliptic_curve.rad"))
    )
    assert rep.flags["outcome"] == "not_rational"
    assert rep.certificates["reparametrization"]["evidence"]["genus"] == 1


def test_run_integrate_nested_and_rational():
    rep = run_command(
        "integrate", ProblemRequest(problem=read_problem("nested_circle_integral.rad"))
    )
    assert rep.residuals["ok"] is True
    rep2 = run_command(
        "integrate", ProblemRequest(problem=read_problem("rational_integral.rad"))
    )
    cert = rep2.certificates["integral_transform"]
    assert cert["forward_substitution"] == "u"


def test_input_error_on_bad_branch():
    with pytest.raises(InputError):
        run_command("implicitize", ProblemRequest(problem=read_problem("eq1_bad.rad")))


def test_budget_failure():
    with pytest.raises(ComputationFailure):
        run_command(
            "implicitize",
            ProblemRequest(problem=read_problem("surface35.rad"), gb_budget=100),
        )


def test_json_determinism():
    req = lambda: ProblemRequest(problem=read_problem("two_parabolas.rad"), seed=5)
    a = run_command("implicitize", req()).model_dump()
    b = run_command("implicitize", req()).model_dump()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_seed_resolution_precedence(monkeypatch):
    text = read_problem("circle.rad") + "\n[options]\nseed = 3\n"
    monkeypatch.setenv("RADTOWER_SEED", "9")
    from radtower.service import _resolve

    _, seed, _, _, _ = _resolve(ProblemRequest(problem=text))
    assert seed == 3  # file option beats the environment
    _, seed2, _, _, _ = _resolve(ProblemRequest(problem=text, seed=4))
    assert seed2 == 4  # explicit flag beats everything
    _, seed3, _, _, _ = _resolve(ProblemRequest(problem=read_problem("circle.rad")))
    assert seed3 == 9  # environment fills the default only


# -- HTTP API ----------------------------------------------------------------------


def test_api_healthz():
    resp = client.get("/healthz")
    assert resp.status_code == 200 and resp.json()["status"] == "ok"


def test_api_implicitize():
    resp = client.post("/implicitize", json={"problem": read_problem("circle.rad")})
    assert resp.status_code == 200
    body = resp.json()
    assert body["generators"]["radical_variety"] == ["x1^2+x2^2-1"]


def test_api_input_error_is_422():
    resp = client.post("/implicitize", json={"problem": "[vars]\nbogus\n"})
    assert resp.status_code == 422


def test_api_tracing():
    resp = client.post(
        "/tracing-index", json={"problem": read_problem("fermat2.rad")}
    )
    assert resp.status_code == 200
    assert resp.json()["certificates"]["tracing"]["index"] == 2


def test_api_compute_failure_reports_status():
    resp = client.post(
        "/implicitize",
        json={"problem": read_problem("surface35.rad"), "gb_budget": 100},
    )
    assert resp.status_code == 200
    assert resp.json()["flags"]["status"] == "failed"


# -- CLI (thin client) ---------------------------------------------------------------


def test_cli_implicitize_human(problems_dir):
    runner = CliRunner()
    result = runner.invoke(
        cli_main, ["implicitize", str(problems_dir / "circle.rad")]
    )
    assert result.exit_code == 0, result.output
    assert "x1^2+x2^2-1" in result.output
    assert "status: ok" in result.output


def test_cli_json_byte_identical(problems_dir):
    runner = CliRunner()
    args = ["implicitize", str(problems_dir / "two_parabolas.rad"), "--seed", "1", "--json"]
    out1 = runner.invoke(cli_main, args)
    out2 = runner.invoke(cli_main, args)
    assert out1.exit_code == out2.exit_code == 0
    assert out1.output == out2.output


def test_cli_exit_code_input_error(problems_dir):
    runner = CliRunner()
    result = runner.invoke(cli_main, ["implicitize", str(problems_dir / "eq1_bad.rad")])
    assert result.exit_code == 2


def test_cli_exit_code_budget(problems_dir):
    runner = CliRunner()
    result = runner.invoke(
        cli_main,
        ["implicitize", str(problems_dir / "surface35.rad"), "--gb-budget", "100"],
    )
    assert result.exit_code == 1


def test_cli_missing_file():
    runner = CliRunner()
    result = runner.invoke(cli_main, ["implicitize", "no_such_file.rad"])
    assert result.exit_code == 2


def test_cli_malformed_fixture_corpus(tmp_path):
    """No crash on any malformed file: always a clean exit code 2."""
    runner = CliRunner()
    corpus = [
        "",
        "[vars]\n",
        "[vars]\nt\n[param]\n(((\nt\n[branch]\nbase = 0\n",
        "[vars]\nt t\n",
        "[vars]\nt\n[param]\nt\n1/t\n[branch]\nbase = 0\nsqrt(q) = 1\n",
        "\x00\x01\x02",
        "[branch]\nbase = 0\n",
        "[vars]\nt\n[param]\nt\nsqrt(t)\n[branch]\nbase = 0\nsqrt(t) = 5\n",
    ]
    for i, text in enumerate(corpus):
        p = tmp_path / f"bad{i}.rad"
        p.write_text(text)
        result = runner.invoke(cli_main, ["implicitize", str(p)])
        assert result.exit_code == 2, (text, result.output)


def test_cli_thin_client_matches_api(problems_dir):
    """The CLI --server path sends the exact request the in-process path runs."""
    from radtower.cli import _remote

    req = ProblemRequest(problem=read_problem("circle.rad"), seed=0)
    local = run_command("implicitize", req)
    remote = client.post("/implicitize", json=req.model_dump()).json()
    assert remote["generators"] == local.generators
    assert remote["input_hash"] == local.input_hash
