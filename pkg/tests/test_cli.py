import json
import math
import os

import pytest

from ncqm.cli import (EXIT_IO, EXIT_NUMERICAL, EXIT_VALIDATION, ConfigError, default_config, dumps, format_float,
                      main, resolve_config)

SMALL = ["--set", "grid.nx=32", "--set", "grid.ny=32", "--set", "grid.lx=7.0", "--set", "grid.ly=7.0"]


def _runs(outdir):
    return sorted(d for d in os.listdir(outdir))


def _summary(outdir, name=None):
    (run,) = [d for d in _runs(outdir) if name is None or d.startswith(name)]
    with open(os.path.join(outdir, run, "summary.json"), "rb") as fh:
        raw = fh.read()
    return run, raw, json.loads(raw)


def test_spectrum_example(tmp_path, capsys):
    code = main(["spectrum", "--outdir", str(tmp_path), *SMALL])
    assert code == 0
    run, _, data = _summary(tmp_path)
    assert run.startswith("spectrum-")
    assert data["results"]["eigenvalues"][0] == pytest.approx(1.0308, abs=1e-3)
    assert "eigenvalue[0]" in capsys.readouterr().out
    files = set(os.listdir(tmp_path / run))
    assert {"summary.json", "eigenvalues.csv", "eigenvector-0.csv"} <= files


def test_algebra_check_commutative(tmp_path):
    assert main(["algebra-check", "--outdir", str(tmp_path), "--set", "theta=0"]) == 0
    _, _, data = _summary(tmp_path)
    assert data["results"]["all_passed"]


def test_errata_example(tmp_path):
    assert main(["errata", "--outdir", str(tmp_path), "--set", "errata.max_n=10"]) == 0
    run, _, data = _summary(tmp_path)
    (row,) = [c for c in data["results"]["checks"] if c["identity"] == "d2" and c["n"] == 1]
    assert row["closed_form"] == pytest.approx(math.sqrt(math.pi))
    assert row["oracle"] == pytest.approx(-3 * math.sqrt(math.pi))
    assert not row["passed"]
    with open(tmp_path / run / "identities.csv", "rb") as fh:
        text = fh.read()
    assert text.startswith(b"identity,n,m,closed_form,oracle,difference,relative_difference,passed\n")
    assert b"\r" not in text


@pytest.mark.parametrize("args", [
    ["algebra-check", "--seed", "7", "--set", "grid.nx=32", "--set", "grid.ny=32", "--set", "theta=0.5"],
    ["perturb", "--set", "theta=0.3"],
    ["star", "--set", "theta=0.25"],
])
def test_determinism(tmp_path, args):
    for sub in ("a", "b"):
        assert main([*args, "--outdir", str(tmp_path)]) == 0
    runs = _runs(tmp_path)
    assert len(runs) == 2
    blobs = [(tmp_path / r / "summary.json").read_bytes() for r in runs]
    assert blobs[0] == blobs[1]


def test_summary_config_revalidates(tmp_path):
    assert main(["linear", "--outdir", str(tmp_path), "--set", "linear.k=2", "--set", "grid.nx=32",
                 "--set", "grid.ny=16"]) == 0
    _, _, data = _summary(tmp_path)
    cfg = data["config"]
    again = resolve_config("linear", cfg)
    assert again == resolve_config("linear", again)
    assert data["results"]["max_shift_error"] <= 1e-4


def test_config_file_and_potential_override(tmp_path):
    cfg = {"experiment": "spectrum", "grid": {"nx": 32, "ny": 32, "lx": 7.0, "ly": 7.0},
           "potential": {"harmonic": {"wx": 2.0}}, "theta": 0.0, "solver": {"k": 1}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    assert main(["spectrum", "--config", str(path), "--outdir", str(out)]) == 0
    _, _, data = _summary(out)
    assert data["results"]["eigenvalues"][0] == pytest.approx(2.0, abs=1e-6)
    assert main(["spectrum", "--config", str(path), "--outdir", str(out), "--set", "potential.harmonic.wx=1.0"]) == 0


@pytest.mark.parametrize("args", [
    ["spectrum", "--set", "foo=1"],
    ["spectrum", "--set", "grid.nx=7"],
    ["spectrum", "--set", "grid.nx=\"big\""],
    ["spectrum", "--set", "solver.method=\"qr\""],
    ["spectrum", "--set", "potential.quadratic.a=1"],
    ["linear", "--set", "linear.alpha=0", "--set", "linear.beta=0"],
    ["perturb", "--set", "perturb.gamma=-1"],
    ["evolve", "--set", "evolution.steps=1"],
    ["algebra-check", "--jobs", "0"],
    ["spectrum", "--seed", "-1"],
    ["spectrum", "--set", "noequals"],
])
def test_validation_errors(tmp_path, args):
    assert main([*args, "--outdir", str(tmp_path)]) == EXIT_VALIDATION
    assert _runs(tmp_path) == []


def test_config_for_other_experiment(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"experiment": "errata"}))
    assert main(["spectrum", "--config", str(path), "--outdir", str(tmp_path / "o")]) == EXIT_VALIDATION


def test_io_errors(tmp_path):
    assert main(["errata", "--config", str(tmp_path / "missing.json")]) == EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["errata", "--outdir", str(blocker / "sub")]) == EXIT_IO


def test_numerical_failure_leaves_nothing(tmp_path):
    args = ["spectrum", "--outdir", str(tmp_path), *SMALL, "--set", "solver.method=\"lanczos\"",
            "--set", "solver.max_iter=6"]
    assert main(args) == EXIT_NUMERICAL
    assert _runs(tmp_path) == []


def test_outdir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("NCQM_OUTDIR", str(tmp_path))
    assert main(["star"]) == 0
    assert _runs(tmp_path)[0].startswith("star-")


def test_sweep_with_jobs(tmp_path):
    args = ["perturb", "--outdir", str(tmp_path), "--set", "sweep.key=\"theta\"", "--set", "sweep.values=[0,0.3]",
            "--jobs", "2"]
    assert main(args) == 0
    run, _, data = _summary(tmp_path)
    points = data["results"]["points"]
    assert [p["value"] for p in points] == [0, 0.3]
    assert points[0]["results"]["shift"] == pytest.approx(0.015, abs=1e-10)
    for p in points:
        assert (tmp_path / run / p["directory"] / "summary.json").exists()


def test_bad_sweep_key(tmp_path):
    args = ["perturb", "--outdir", str(tmp_path), "--set", "sweep.key=\"nope\"", "--set", "sweep.values=[1]"]
    assert main(args) == EXIT_VALIDATION


def test_evolve_and_ehrenfest_outputs(tmp_path):
    common = ["--outdir", str(tmp_path), "--set", "evolution.steps=50"]
    assert main(["evolve", *common]) == 0
    assert main(["ehrenfest", *common]) == 0
    ev = [r for r in _runs(tmp_path) if r.startswith("evolve")][0]
    header = (tmp_path / ev / "trace.csv").read_text().splitlines()[0]
    assert header == "t,x1,x2,p1,p2,energy,norm"
    _, _, data = _summary(tmp_path, "ehrenfest")
    assert data["results"]["residuals"]["max_residual"] <= 1e-4
    assert 3.5 <= data["results"]["refinement_ratio"] <= 4.5


def test_json_formatting():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(float("nan")) == "null"
    text = dumps({"b": 1.0, "a": [0.5, True, None]})
    assert text.index('"a"') < text.index('"b"') and text.endswith("\n")
    assert json.loads(text) == {"a": [0.5, True, None], "b": 1.0}


def test_default_configs_validate():
    for exp in ("algebra-check", "star", "spectrum", "linear", "evolve", "ehrenfest", "perturb", "errata"):
        cfg = resolve_config(exp)
        assert cfg["experiment"] == exp
    with pytest.raises(ConfigError):
        default_config("nothing")
