import json
import math

import pytest

from microlocal.cli import main

from conftest import run_cli


def test_validate_rep_exit_codes(cli_inputs, capsys):
    f = cli_inputs
    code, rep = run_cli(["validate-rep", "--graph", f["a2"], "--rep", f["a2zero"]], capsys)
    assert code == 0 and rep["summary"]["failed"] == 0
    code, _ = run_cli(["validate-rep", "--graph", f["a2"], "--rep", f["a2bad"]], capsys)
    assert code == 1
    code, _ = run_cli(["validate-rep", "--graph", f["a2"], "--rep", f["malformed"]], capsys)
    assert code == 2


def test_validate_rep_jordan_norm(cli_inputs, capsys):
    code, rep = run_cli(["validate-rep", "--graph", cli_inputs["jordan"], "--rep", cli_inputs["jordanrep"]], capsys)
    assert code == 1
    assert math.isclose(rep["result"]["vertices"]["v0"]["norm"], math.sqrt(1.25))


def test_missing_file_is_usage_error(cli_inputs, capsys):
    assert main(["validate-rep", "--graph", "/nonexistent.json", "--rep", cli_inputs["a2zero"]]) == 2


def test_unknown_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_ft_modes(cli_inputs, capsys):
    code, rep = run_cli(["ft", "--diagram", cli_inputs["j23"]], capsys)
    assert code == 0
    d = rep["result"]["diagram"]
    assert d["a"]["entries"][0] == [-3.0, 0.0]
    assert math.isclose(d["b"]["entries"][0][0], 2 / 7)
    code, rep = run_cli(["ft", "--diagram", cli_inputs["uv"], "--mode", "I", "--times", "2"], capsys)
    assert code == 0 and rep["result"]["times"] == 2
    code, _ = run_cli(["ft", "--diagram", cli_inputs["uv"], "--mode", "J"], capsys)
    assert code == 2


def test_rh_consistency(cli_inputs, capsys):
    code, rep = run_cli(["rh", "--node", cli_inputs["uv"]], capsys)
    assert code == 0
    c = rep["result"]["consistency"]
    assert c["exp_law_residual"] < 1e-10 and c["roundtrip_residual"] < 1e-8
    code, rep = run_cli(["rh", "--node", cli_inputs["j23"], "--direction", "to-derham"], capsys)
    assert code == 0


def test_expand_then_glue(cli_inputs, tmp_path, capsys):
    loc = tmp_path / "loc.json"
    code, _ = run_cli(["expand", "--graph", cli_inputs["a2"], "--rep", cli_inputs["a2zero"], "--json-out", str(loc), "--quiet"], capsys)
    assert code == 0 and loc.exists()
    local = json.loads(loc.read_text())["result"]
    (tmp_path / "local.json").write_text(json.dumps(local))
    code, rep = run_cli(["glue", "--graph", cli_inputs["a2"], "--local", str(tmp_path / "local.json")], capsys)
    assert code == 0 and rep["result"]["relations"]["satisfied"]


def test_qh_check_and_assemble(cli_inputs, capsys):
    code, rep = run_cli(["qh-check", "--space", "double:1", "--points", "3", "--triples", "2"], capsys)
    assert code == 0
    code, rep = run_cli(["qh-check", "--space", "torus:1"], capsys)
    assert code == 2
    code, rep = run_cli(["assemble", "--graph", cli_inputs["a2"], "--dims", cli_inputs["a2dims"]], capsys)
    assert code == 0 and rep["result"]["dim"] == rep["result"]["expected_dim"] == 2


def test_solve_fiber_and_reduce(cli_inputs, capsys):
    code, rep = run_cli(["solve-fiber", "--space", "fused_double:2", "--target", "-1"], capsys)
    assert code == 0 and rep["result"]["success"]
    code, rep = run_cli(["solve-fiber", "--space", "fused_double:2", "--target", "1j", "--max-iter", "30"], capsys)
    assert code == 1 and not rep["result"]["success"]
    code, rep = run_cli(["reduce", "--space", "vdb:1,1", "--origin"], capsys)
    assert code == 0 and rep["result"]["reduction"]["reduced_dim"] == 2
    code, rep = run_cli(["reduce", "--space", cli_inputs["g1"], "--seed", "3"], capsys)
    assert code == 0 and rep["result"]["fiber"]["success"]
    code, rep = run_cli(["reduce", "--space", "fused_double:2", "--origin"], capsys)
    assert code == 1


def test_randgen_seeds(cli_inputs, capsys):
    args = ["randgen", "--graph", cli_inputs["a2"], "--dims", cli_inputs["a2dims"]]
    _, r1 = run_cli(args + ["--seed", "1"], capsys)
    _, r2 = run_cli(args + ["--seed", "2"], capsys)
    assert r1["result"] != r2["result"]
    assert r1["config"]["seed"] == 1


def test_global_flags_either_side(cli_inputs, capsys):
    _, before = run_cli(["--tol", "1e-6", "ft", "--diagram", cli_inputs["j23"]], capsys)
    _, after = run_cli(["ft", "--diagram", cli_inputs["j23"], "--tol", "1e-6"], capsys)
    assert before["config"]["eq_tol"] == after["config"]["eq_tol"] == 1e-6


def test_report_schema(cli_inputs, capsys):
    _, rep = run_cli(["ft", "--diagram", cli_inputs["j23"]], capsys)
    assert set(rep) == {"argv", "checks", "command", "config", "result", "summary", "version"}
