"""Command line interface: exit codes, file artifacts, output schemas."""

import json

import numpy as np
import pytest

from nerhd.cli import main
from nerhd.eos import IdealGas
from nerhd.linearize import build_bundle, equilibrium_state


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return header, data


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    capsys.readouterr()


def test_usage_errors_map_to_bad_config(capsys):
    assert main([]) == 4
    assert main(["frobnicate"]) == 4
    capsys.readouterr()


def test_eos_check_default_passes(tmp_path, capsys):
    rc = main(["eos-check", "--out", str(tmp_path), "--format", "json"])
    assert rc == 0
    payload = json.loads((tmp_path / "eos_check.json").read_text())
    assert payload["passed"] is True
    assert payload["worst_violation"] == 0.0
    assert payload["eos"]["kind"] == "ideal-gas"
    stdout = json.loads(capsys.readouterr().out)
    assert stdout == payload


def test_eos_check_rejects_bad_sample(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {"sample": [[1.0, -2.0]]})
    assert main(["eos-check", "--config", cfg, "--out", str(tmp_path)]) == 4
    capsys.readouterr()


def test_assemble_bundle_json(tmp_path, capsys):
    rc = main(["assemble", "--out", str(tmp_path), "--format", "json"])
    assert rc == 0
    capsys.readouterr()
    payload = json.loads((tmp_path / "assemble.json").read_text())
    mats = payload["matrices"]
    for name in ("A0", "A1", "L", "B", "S", "A0_bar", "A1_bar", "L_bar",
                 "B_bar", "A0_t", "A1_t", "L_t", "B_t", "hessian"):
        assert name in mats
        assert np.asarray(mats[name]).shape == (4, 4)
    bundle = build_bundle(IdealGas(), equilibrium_state(1.0, 0.0, 1.0, 1.0, 1.0))
    np.testing.assert_allclose(np.asarray(mats["A0"]), bundle.A0, atol=1e-15)
    np.testing.assert_allclose(np.asarray(mats["A1_t"]), bundle.A1_t, atol=1e-15)


def test_assemble_single_matrix_csv(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {"matrix": "A1_t", "u_bar": 0.3})
    rc = main(["assemble", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    header, data = read_csv(tmp_path / "assemble.csv")
    assert data.shape == (4, 4)
    bundle = build_bundle(IdealGas(), equilibrium_state(1.0, 0.3, 1.0, 1.0, 1.0))
    np.testing.assert_allclose(data, bundle.A1_t, atol=1e-15)
    # stdout carries the same table in csv mode
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 5


def test_assemble_unknown_matrix(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {"matrix": "Q9"})
    assert main(["assemble", "--config", cfg, "--out", str(tmp_path)]) == 4
    capsys.readouterr()


def test_coupling_one_d_exit_zero(tmp_path, capsys):
    rc = main(["coupling", "--out", str(tmp_path), "--format", "json"])
    assert rc == 0
    capsys.readouterr()
    payload = json.loads((tmp_path / "coupling.json").read_text())
    assert payload["coupled"] is True
    assert payload["witness"] is None
    assert payload["lambda_min"] > 0.0
    K = np.asarray(payload["K"])
    assert K.shape == (4, 4)
    bundle = build_bundle(IdealGas(), equilibrium_state(1.0, 0.0, 1.0, 1.0, 1.0))
    skew = K @ bundle.A0_t
    assert np.max(np.abs(skew + skew.T)) < 1e-8


def test_coupling_two_d_exit_two_with_witness(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {"u_bar": [0.4, -0.2]})
    rc = main(["coupling", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 2
    capsys.readouterr()
    payload = json.loads((tmp_path / "coupling.json").read_text())
    assert payload["coupled"] is False
    assert payload["K"] is None
    assert payload["residual"] <= 1e-10
    psi = np.asarray(payload["witness"]["psi"])
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12
    # drift eigenvalue is -u.omega for the advected kernel mode
    omega = np.asarray(payload["witness"]["omega"])
    assert abs(payload["witness"]["mu"] + np.dot([0.4, -0.2], omega)) < 1e-10


def test_coupling_rejects_inadmissible_state(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {"rho_bar": -1.0})
    assert main(["coupling", "--config", cfg, "--out", str(tmp_path)]) == 4
    capsys.readouterr()


def test_spectrum_outputs(tmp_path, capsys):
    rc = main(["spectrum", "--out", str(tmp_path), "--format", "json"])
    assert rc == 0
    capsys.readouterr()
    header, data = read_csv(tmp_path / "spectrum.csv")
    assert header == ["xi", "re_lambda_1", "re_lambda_2", "re_lambda_3",
                      "re_lambda_4", "im_lambda_1", "im_lambda_2",
                      "im_lambda_3", "im_lambda_4", "gap"]
    assert data.shape[0] >= 200
    # every eigenvalue real part is bounded by the recorded gap
    assert np.all(data[:, 1:5].max(axis=1) <= data[:, 9] + 1e-12)
    payload = json.loads((tmp_path / "spectrum.json").read_text())
    assert payload["fitted_c"] > 0.0
    table = payload["branch_table"]
    assert len(table) == 4
    vanishing = [b for b in table if abs(b["re_lambda0"]) <= 1e-10]
    assert len(vanishing) == 3
    assert all(b["curvature"] < 0.0 for b in vanishing)


def test_spectrum_deterministic_reruns(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["spectrum", "--out", str(a)]) == 0
    assert main(["spectrum", "--out", str(b)]) == 0
    capsys.readouterr()
    assert (a / "spectrum.csv").read_bytes() == (b / "spectrum.csv").read_bytes()
    assert (a / "spectrum.json").read_bytes() == (b / "spectrum.json").read_bytes()


def test_linear_decay_schema_and_slope(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {
        "n_cells": 2 ** 12, "length": 1000.0, "width": 1.0, "t_max": 2e3,
    })
    rc = main(["linear-decay", "--config", cfg, "--out", str(tmp_path),
               "--format", "json"])
    assert rc == 0
    capsys.readouterr()
    header, data = read_csv(tmp_path / "linear_decay.csv")
    assert header == ["t", "l2_norm", "h1_seminorm"]
    assert np.all(np.diff(data[:, 0]) > 0.0)
    payload = json.loads((tmp_path / "linear_decay.json").read_text())
    assert abs(payload["slope"] + 0.25) < 0.05
    lo, hi = payload["slope_ci"]
    assert lo < payload["slope"] < hi
    assert payload["report"]["verdict"] is True


def test_linear_decay_rejects_nonlinear_kind(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {"kind": "nonlinear-decay"})
    rc = main(["linear-decay", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 4
    capsys.readouterr()


def test_simulate_trajectory_and_checkpoint(tmp_path, capsys):
    ckpt = tmp_path / "state.bin"
    cfg = write_config(tmp_path, "sim.json", {
        "n_cells": 256, "length": 100.0, "t_final": 5.0, "out_interval": 1.0,
        "amplitude": 1e-2, "width": 5.0, "checkpoint_out": str(ckpt),
    })
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    header, data = read_csv(tmp_path / "trajectory.csv")
    assert header == ["t", "mass", "momentum", "energy", "entropy",
                      "l2", "h1", "h2", "h3", "P_plus_norm"]
    assert data[0, 0] == 0.0
    assert data[-1, 0] == pytest.approx(5.0)
    # conserved columns stay put to rounding
    assert np.allclose(data[:, 1], data[0, 1], rtol=1e-12)
    assert np.allclose(data[:, 3], data[0, 3], rtol=1e-12)
    assert out.splitlines()[0] == ",".join(header)
    assert ckpt.exists()

    cfg2 = write_config(tmp_path, "sim2.json", {
        "n_cells": 256, "length": 100.0, "t_final": 8.0, "out_interval": 1.0,
        "checkpoint_in": str(ckpt),
    })
    rc = main(["simulate", "--config", cfg2, "--out", str(tmp_path / "resume"),
               "--format", "json"])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["t_final"] == pytest.approx(8.0)
    header, data = read_csv(tmp_path / "resume" / "trajectory.csv")
    assert data[0, 0] == pytest.approx(5.0)


def test_simulate_numerical_failure_exit_three(tmp_path, capsys):
    cfg = write_config(tmp_path, "sim.json", {
        "n_cells": 128, "length": 20.0, "t_final": 5.0,
        "amplitude": 6.0, "width": 1.0, "components": [0, 1, 0, 0],
    })
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 3
    assert "numerical failure" in capsys.readouterr().err


def test_simulate_rejects_unknown_key(tmp_path, capsys):
    cfg = write_config(tmp_path, "sim.json", {"cells": 64})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 4
    capsys.readouterr()


def test_decay_small_run(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {
        "n_cells": 512, "length": 200.0, "t_final": 60.0,
        "fit_t_min": 10.0, "out_interval": 1.0, "tolerance": 0.3,
    })
    rc = main(["decay", "--config", cfg, "--out", str(tmp_path),
               "--format", "json"])
    assert rc == 0
    capsys.readouterr()
    payload = json.loads((tmp_path / "decay.json").read_text())
    assert payload["verdict"] is True
    assert payload["error"] is None
    assert set(payload["slopes"]) == {"l2", "h1", "h2", "h3"}
    header, data = read_csv(tmp_path / "decay.csv")
    assert header[0] == "t"
    assert set(header[1:]) == {"l2", "h1", "h2", "h3"}


def test_decay_blowup_exit_three(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {
        "n_cells": 128, "length": 20.0, "t_final": 5.0, "amplitude": 6.0,
        "width": 1.0, "components": [0, 1, 0, 0], "fit_t_min": 1.0,
    })
    rc = main(["decay", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 3
    err = capsys.readouterr().err
    assert "numerical failure" in err
    payload = json.loads((tmp_path / "decay.json").read_text())
    assert payload["verdict"] is False
    assert "PositivityLoss" in payload["error"]


def test_report_suite_pass(tmp_path, capsys):
    cfg = write_config(tmp_path, "suite.json", [
        {"kind": "coupling-sweep", "name": "sweep-1d", "dim": 1, "n_states": 5},
        {"kind": "coupling-sweep", "name": "sweep-2d", "dim": 2, "n_states": 5},
        {"kind": "spectrum-scan", "name": "scan"},
    ])
    rc = main(["report", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "all claims pass" in out
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["all_pass"] is True
    assert [row["name"] for row in payload["experiments"]] == [
        "sweep-1d", "sweep-2d", "scan"]
    md = (tmp_path / "report.md").read_text()
    assert "| sweep-1d |" in md


def test_report_failure_exit_two(tmp_path, capsys):
    # an impossibly tight tolerance turns a healthy fit into a failed claim
    cfg = write_config(tmp_path, "suite.json", [{
        "kind": "linear-decay", "name": "strict", "n_cells": 2 ** 10,
        "length": 500.0, "width": 1.0, "t_max": 1e3, "tolerance": 1e-6,
    }])
    rc = main(["report", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 2
    assert "failures present" in capsys.readouterr().out
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["all_pass"] is False


def test_report_broken_experiment_becomes_failing_row(tmp_path, capsys):
    # 10 geometric samples leave too few points past the transient cutoff;
    # the suite must keep going and report the failure in place
    cfg = write_config(tmp_path, "suite.json", [
        {"kind": "linear-decay", "name": "starved", "n_cells": 2 ** 10,
         "length": 500.0, "width": 1.0, "t_max": 1e3, "n_times": 10},
        {"kind": "spectrum-scan", "name": "scan"},
    ])
    rc = main(["report", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 2
    capsys.readouterr()
    payload = json.loads((tmp_path / "report.json").read_text())
    rows = {row["name"]: row for row in payload["experiments"]}
    assert rows["starved"]["verdict"] is False
    assert "InsufficientData" in rows["starved"]["measured"]
    assert rows["scan"]["verdict"] is True


def test_report_empty_suite(tmp_path, capsys):
    cfg = write_config(tmp_path, "suite.json", [])
    assert main(["report", "--config", cfg, "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload == {"experiments": [], "all_pass": True}


def test_report_rejects_malformed_config(tmp_path, capsys):
    cfg = write_config(tmp_path, "suite.json", {"not_experiments": 1})
    assert main(["report", "--config", cfg, "--out", str(tmp_path)]) == 4
    capsys.readouterr()


def test_missing_and_invalid_config_files(tmp_path, capsys):
    assert main(["assemble", "--config", str(tmp_path / "nope.json")]) == 4
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["assemble", "--config", str(bad)]) == 4
    capsys.readouterr()
