import json
import subprocess
import sys

import numpy as np
import pytest

from rattleback.cli import main

SUBCOMMANDS = ["simulate", "verify", "leaves", "potential", "analyze", "linearize"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help(cmd, tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main([cmd, "--help"])
    assert exc.value.code == 0
    assert cmd in capsys.readouterr().out
    assert not list(tmp_path.iterdir())


def test_linearize(capsys):
    code, out, _ = run(capsys, "linearize", "--lambda", "4", "--spin", "0.5")
    assert code == 0
    assert json.loads(out)["eigenvalues"] == [2.0, -0.5, 0.0]


def test_simulate_fig1b(tmp_path, capsys):
    out_csv = tmp_path / "fig1b.csv"
    code, out, _ = run(capsys, "simulate", "--model", "prs", "--lambda", "4",
                       "--ic", "0.01,0.01,0.5", "--t-end", "100", "--out", str(out_csv))
    assert code == 0
    rep = json.loads(out)
    assert rep["max_rel_drift_H"] <= 1e-8 and rep["max_rel_drift_C"] <= 1e-8
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "t,P,R,S"
    assert len(lines[1].split(",")[1]) == len("1.0000000000000000e-02")

    code, out, _ = run(capsys, "analyze", "--input", str(out_csv))
    assert code == 0
    stats = json.loads(out)
    assert len(stats["crossing_times"]) >= 4 and stats["transition_ratio"] > 1


def test_simulate_rocking_equilibrium_is_constant(tmp_path, capsys):
    out_csv = tmp_path / "eq.csv"
    code, _, _ = run(capsys, "simulate", "--ic", "1,2,0", "--t-end", "10", "--out", str(out_csv))
    assert code == 0
    body = np.loadtxt(out_csv, delimiter=",", skiprows=1)
    assert np.all(body[:, 1:] == [1, 2, 0])


@pytest.mark.parametrize("model", ["darboux", "dual", "extended"])
def test_simulate_models(model, tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--model", model, "--ic", "0.2,0.2,0.2",
                       "--t-end", "20", "--out", str(tmp_path / "m.csv"))
    assert code == 0
    assert json.loads(out)


def test_simulate_y_model(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--model", "y", "--ic", "1,1,0.5", "--t-end", "5",
                       "--out", str(tmp_path / "y.csv"))
    assert code == 0
    assert json.loads(out)["max_rel_drift_C"] <= 1e-8


def test_simulate_leapfrog(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--model", "darboux", "--method", "leapfrog",
                       "--dt", "1e-3", "--t-end", "5", "--out", str(tmp_path / "lf.csv"))
    assert code == 0
    assert json.loads(out)["max_rel_drift_C"] == 0.0


def test_simulate_to_stdout(capsys):
    code, out, err = run(capsys, "simulate", "--t-end", "1")
    assert code == 0
    assert out.startswith("t,P,R,S\n")
    assert "max_rel_drift_H" in err


@pytest.mark.parametrize("argv", [
    ["simulate", "--model", "nope"],
    ["simulate", "--ic", "1,2"],
    ["simulate", "--ic", "a,b,c"],
    ["simulate", "--t-end", "-1"],
    ["simulate", "--method", "leapfrog", "--model", "prs"],
    ["simulate", "--model", "darboux", "--ic", "1,0,1"],
    ["simulate", "--model", "y", "--ic", "0.01,0.01,0.5"],
    ["verify", "--points", "0"],
    ["leaves", "--r-range", "-1,1"],
    ["potential", "--resolution", "1"],
    ["analyze"],
])
def test_usage_errors(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_integration_failure_exit_code(capsys):
    # a unit leapfrog step from R = 100 overshoots the steep wall of the potential
    code, _, err = run(capsys, "simulate", "--model", "darboux", "--method", "leapfrog",
                       "--dt", "1", "--ic", "0.01,100,0", "--t-end", "10")
    assert code == 3
    assert "t = " in err


def test_analyze_insufficient(tmp_path, capsys):
    path = tmp_path / "flat.csv"
    path.write_text("t,P,R,S\n0,1,2,0.5\n1,1,2,0.6\n")
    code, _, _ = run(capsys, "analyze", "--input", str(path))
    assert code == 4


def test_verify_default(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    rep = json.loads(out)
    assert rep["pass"] and rep["seed"] == 0
    checks = {(r["type"], r["check"]) for r in rep["records"]}
    assert ("PRS(lambda=4)", "casimir_in_y_printed_form") in checks


def test_verify_fails_with_impossible_tolerance(capsys):
    code, out, _ = run(capsys, "verify", "--points", "5", "--tol", "1e-30")
    assert code == 1
    assert not json.loads(out)["pass"]


def test_potential(tmp_path, capsys):
    path = tmp_path / "u.csv"
    code, out, _ = run(capsys, "potential", "--lambda", "4", "--C", "1,0.1,0.01,0.001",
                       "--out", str(path))
    assert code == 0
    header = path.read_text().splitlines()[0].split(",")
    assert header == ["Z1", "U_C=1", "U_C=0.1", "U_C=0.01", "U_C=0.001"]
    assert len(json.loads(out)["minima"]) == 4


def test_leaves(tmp_path, capsys):
    path = tmp_path / "leaf.csv"
    code, _, _ = run(capsys, "leaves", "--lambda", "4", "--C", "1", "--r-range", "0.5,1",
                     "--resolution", "3", "--out", str(path))
    assert code == 0
    rows = [r.split(",") for r in path.read_text().splitlines()[1:]]
    leaf = np.array([r[2:] for r in rows if r[0] == "leaf"], dtype=float)
    assert np.all(leaf[leaf[:, 1] == 1.0][:, 0] == 1.0)


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lambda": 2.0, "spin": 1.0}))
    _, out, _ = run(capsys, "--config", str(cfg), "linearize")
    assert json.loads(out)["eigenvalues"] == [2.0, -1.0, 0.0]
    _, out, _ = run(capsys, "--config", str(cfg), "linearize", "--spin", "3")
    assert json.loads(out)["eigenvalues"] == [6.0, -3.0, 0.0]


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit) as exc:
        main(["--config", str(cfg), "linearize"])
    assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rattleback", "linearize"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["eigenvalues"] == [2.0, -0.5, 0.0]
