"""Command-line entry points: simulate, sweep, verify, mms."""

import json

import pytest

from biofilmfront.cli import main

GOOD = """
problem:
  kinetics: {preset: zero}
  phi: [0.0]
  theta: ["cos(pi*z/2)"]
  psi: [0.0]
  D: [1.0]
  lambda: 0.5
  R0: 1.0
solver: {N: 20, dt: 1.0e-3, t_end: 0.02}
output: {stride: 10}
"""

DISSIPATIVE = """
problem:
  kinetics:
    preset: linear
    A: [[-1.0]]
    c: [0.0]
    B: [[-1.0]]
    d: [0.0]
  phi: [0.0]
  theta: ["cos(pi*z/2)"]
  psi: [0.0]
  D: [1.0]
  lambda: 0.5
  R0: 1.0
solver: {N: 30, dt: 2.0e-3, t_end: 0.1}
verify: {alpha: 1.0}
"""


@pytest.fixture
def good_cfg(tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text(GOOD)
    return p


def test_simulate_writes_outputs(good_cfg, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["simulate", "--config", str(good_cfg), "--out", str(out)])
    assert rc == 0
    assert (out / "scalars.csv").exists()
    assert (out / "manifest.json").exists()
    text = capsys.readouterr().out
    assert "completed" in text


def test_simulate_overrides(good_cfg, tmp_path):
    out = tmp_path / "out"
    rc = main(["simulate", "--config", str(good_cfg), "--out", str(out),
               "--grid-n", "25", "--dt", "2e-3"])
    assert rc == 0
    lines = (out / "snapshot_0.csv").read_text().splitlines()
    assert len(lines) == 1 + 26


def test_simulate_bad_config_exit_2(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text(GOOD.replace("lambda", "lamda"))
    rc = main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")])
    assert rc == 2


def test_missing_file_exit_2(tmp_path):
    rc = main(["simulate", "--config", str(tmp_path / "nope.yaml"),
               "--out", str(tmp_path / "o")])
    assert rc == 2


def test_usage_error_exit_2():
    assert main(["simulate", "--no-such-flag"]) == 2
    assert main([]) == 2


def test_determinism_across_invocations(good_cfg, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(good_cfg), "--out", str(out1)]) == 0
    assert main(["simulate", "--config", str(good_cfg), "--out", str(out2)]) == 0
    assert (out1 / "scalars.csv").read_bytes() == (out2 / "scalars.csv").read_bytes()


def test_verify_pass(good_cfg, capsys):
    rc = main(["verify", "--config", str(good_cfg)])
    assert rc == 0
    assert "verify: PASS" in capsys.readouterr().out


def test_verify_with_envelope(tmp_path, capsys):
    p = tmp_path / "diss.yaml"
    p.write_text(DISSIPATIVE)
    rc = main(["verify", "--config", str(p)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "envelope" in out
    assert "verify: PASS" in out


def test_sweep_summary(good_cfg, tmp_path, capsys):
    out = tmp_path / "sweep"
    rc = main(["sweep", "--config", str(good_cfg), "--param", "lambda",
               "--values", "0.25,0.5", "--out", str(out)])
    assert rc == 0
    lines = (out / "sweep_summary.csv").read_text().splitlines()
    assert lines[0] == "lambda,outcome,final_R,final_energy,steps"
    assert len(lines) == 3
    assert (out / "lambda=0.25" / "manifest.json").exists()
    # larger detachment coefficient leaves a thinner film
    r_weak = float(lines[1].split(",")[2])
    r_strong = float(lines[2].split(",")[2])
    assert r_strong < r_weak


def test_sweep_parallel_matches_serial(good_cfg, tmp_path):
    serial, par = tmp_path / "s", tmp_path / "p"
    assert main(["sweep", "--config", str(good_cfg), "--param", "solver.dt",
                 "--values", "1e-3,2e-3", "--out", str(serial)]) == 0
    assert main(["sweep", "--config", str(good_cfg), "--param", "solver.dt",
                 "--values", "1e-3,2e-3", "--jobs", "2", "--out", str(par)]) == 0
    assert (serial / "sweep_summary.csv").read_text() == (par / "sweep_summary.csv").read_text()


def test_mms_command(capsys):
    rc = main(["mms"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "substrate_diffusion" in out
    assert "thickness_ode" in out


def test_manifest_records_hash(good_cfg, tmp_path):
    out = tmp_path / "out"
    main(["simulate", "--config", str(good_cfg), "--out", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["config_hash"]) == 64
    assert manifest["package"] == "biofilmfront"
