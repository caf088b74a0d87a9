"""End-to-end tests of the command-line front end."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from shapeflow import checks, cli, evolution, kp
from shapeflow.grassmannian import step2_graph

IDENTITY_CONFIG = {
    "driver": {"pieces": [{"t_start": 0.0, "atoms": []}]},
    "horizon": 0.2,
    "step": 0.01,
    "order": 8,
    "m_neg": 2,
    "n_psi": 2,
    "seed": 5,
}

ATOM_CONFIG = {
    "driver": {"pieces": [{"t_start": 0.0, "atoms": [{"theta": 0.0, "mu": 1.0}]}]},
    "horizon": 0.3,
    "step": 0.005,
    "order": 16,
    "m_neg": 4,
    "n_psi": 4,
    "seed": 1,
}


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_rows(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# argument handling / exit codes


def test_dump_identities_lists_catalogue(capsys):
    assert cli.main(["--dump-identities"]) == cli.EXIT_OK
    lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.strip()]
    assert len(lines) == len(checks.registry())
    for line in lines:
        rec = json.loads(line)
        assert set(rec) == {"name", "suite", "source"}


def test_no_command_is_config_error():
    assert cli.main([]) == cli.EXIT_CONFIG_ERROR


def test_unknown_command_exits_nonzero():
    assert cli.main(["frobnicate"]) != cli.EXIT_OK


def test_missing_config_file(tmp_path):
    missing = str(tmp_path / "nope.json")
    assert cli.main(["evolve", "--config", missing]) == cli.EXIT_CONFIG_ERROR


def test_malformed_json_config(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"driver": ')
    assert cli.main(["evolve", "--config", str(path)]) == cli.EXIT_CONFIG_ERROR


def test_invalid_driver_weights_rejected(tmp_path):
    bad = dict(IDENTITY_CONFIG)
    bad["driver"] = {
        "pieces": [{"t_start": 0.0, "atoms": [{"theta": 0.0, "mu": 0.25}]}]
    }
    path = write_config(tmp_path, bad)
    assert cli.main(["evolve", "--config", path]) == cli.EXIT_CONFIG_ERROR


def test_psibar0_width_mismatch_rejected(tmp_path):
    bad = dict(IDENTITY_CONFIG)
    bad["psibar0"] = [1.0, 2.0]  # window [-2, 2] needs five entries
    path = write_config(tmp_path, bad)
    assert cli.main(["evolve", "--config", path]) == cli.EXIT_CONFIG_ERROR


def test_divergence_maps_to_numerical_failure(tmp_path, monkeypatch):
    def explode(*args, **kwargs):
        raise evolution.StepRejected("blew up")

    monkeypatch.setattr(cli, "evolve", explode)
    path = write_config(tmp_path, IDENTITY_CONFIG)
    code = cli.main(["evolve", "--config", path, "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_NUMERICAL_FAILURE


# ---------------------------------------------------------------------------
# evolve


def test_evolve_identity_driver_conserves_everything(tmp_path):
    path = write_config(tmp_path, IDENTITY_CONFIG)
    out = tmp_path / "out"
    assert cli.main(["evolve", "--config", path, "--out", str(out)]) == cli.EXIT_OK

    report = json.loads((out / "conservation.json").read_text())
    assert report["steps"] == 21
    assert report["energy_invariant_drift"] <= 1e-12
    assert max(report["drift"].values()) <= 1e-12

    header, rows = read_rows(out / "trajectory.csv")
    for name in ("re_c_1", "im_c_8", "re_psibar_-2", "re_Gbar_0", "re_H"):
        assert name in header
    c_cols = [i for i, name in enumerate(header) if name.startswith(("re_c_", "im_c_"))]
    for row in rows:
        assert all(float(row[i]) == 0.0 for i in c_cols)


def test_evolve_atom_reports_koebe_error(tmp_path):
    path = write_config(tmp_path, ATOM_CONFIG)
    out = tmp_path / "out"
    assert cli.main(["evolve", "--config", path, "--out", str(out)]) == cli.EXIT_OK

    report = json.loads((out / "conservation.json").read_text())
    assert report["koebe_max_error"] < 1e-8
    assert report["energy_invariant_drift"] < 1e-9

    header, rows = read_rows(out / "trajectory.csv")
    assert header[-1] == "koebe_error"
    worst = max(float(row[-1]) for row in rows)
    assert worst == pytest.approx(report["koebe_max_error"])


def test_evolve_identity_driver_omits_koebe_column(tmp_path):
    path = write_config(tmp_path, IDENTITY_CONFIG)
    out = tmp_path / "out"
    cli.main(["evolve", "--config", path, "--out", str(out)])
    header, _ = read_rows(out / "trajectory.csv")
    assert "koebe_error" not in header
    report = json.loads((out / "conservation.json").read_text())
    assert "koebe_max_error" not in report


def test_evolve_reruns_are_byte_identical(tmp_path):
    path = write_config(tmp_path, ATOM_CONFIG)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["evolve", "--config", path, "--out", str(out)]) == cli.EXIT_OK
        outs.append(out)
    for fname in ("trajectory.csv", "conservation.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_evolve_flag_overrides(tmp_path):
    path = write_config(tmp_path, IDENTITY_CONFIG)
    out = tmp_path / "out"
    code = cli.main(
        [
            "evolve",
            "--config",
            path,
            "--out",
            str(out),
            "--horizon",
            "0.1",
            "--step",
            "0.02",
            "--order",
            "4",
        ]
    )
    assert code == cli.EXIT_OK
    report = json.loads((out / "conservation.json").read_text())
    assert report["steps"] == 6
    assert report["order"] == 4
    header, _ = read_rows(out / "trajectory.csv")
    assert "re_c_4" in header and "re_c_5" not in header


# ---------------------------------------------------------------------------
# check


def test_check_suite_passes_and_writes_report(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["check", "bracket", "--out", str(out)]) == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["suite"] == "bracket" and payload["passed"]
    assert all(r["passed"] for r in payload["results"])
    on_disk = json.loads((out / "check_bracket.json").read_text())
    assert on_disk == payload


def test_check_failure_sets_exit_code(monkeypatch, capsys):
    def fake_suite(suite):
        return [
            {"name": "x", "suite": suite, "source": "s", "passed": False, "detail": "d"}
        ]

    monkeypatch.setattr(cli.checks, "run_suite", fake_suite)
    assert cli.main(["check", "basis"]) == cli.EXIT_CHECK_FAILURE
    capsys.readouterr()


# ---------------------------------------------------------------------------
# kp / tau


def test_kp_trivial_shape_rows(tmp_path):
    config = {
        "f_source": {"c": []},
        "n": 1,
        "N": 8,
        "t_rows": [[0.05, 0.03, 0.02], [0.2]],
    }
    path = write_config(tmp_path, config)
    out = tmp_path / "out"
    assert cli.main(["kp", "--config", path, "--out", str(out)]) == cli.EXIT_OK
    header, rows = read_rows(out / "kp_sweep.csv")
    assert header == [
        "t1",
        "t2",
        "t3",
        "re_omega1",
        "im_omega1",
        "re_lambda1",
        "im_lambda1",
        "residual",
        "re_tau",
        "im_tau",
    ]
    assert len(rows) == 2
    for row in rows:
        record = dict(zip(header, row))
        assert float(record["re_omega1"]) == 0.0
        assert float(record["im_omega1"]) == 0.0
        assert float(record["residual"]) == 0.0
        assert float(record["re_tau"]) == 1.0
        assert float(record["im_tau"]) == 0.0
    # 1-entry rows are padded with zeros
    assert [rows[1][0], rows[1][1], rows[1][2]] == ["0.2", "0.0", "0.0"]


def test_kp_matches_library_route(tmp_path):
    c = [0.5, 0.125, 0.0416, 0.015]
    trow = (0.05, 0.03, 0.02)
    config = {
        "f_source": {"c": c},
        "n": 1,
        "N": 12,
        "t_rows": [list(trow)],
        "convergence_pair": True,
    }
    path = write_config(tmp_path, config)
    out = tmp_path / "out"
    assert cli.main(["kp", "--config", path, "--out", str(out)]) == cli.EXIT_OK
    header, rows = read_rows(out / "kp_sweep.csv")
    assert header[-1] == "residual_24"
    record = dict(zip(header, rows[0]))

    parts = kp.omega1_and_partials(kp.ABForm.build(c, trow, 12))
    omega1 = parts[(0, 0, 0)]
    lambda1 = -parts[(1, 0, 0)]
    op = step2_graph(c, 1, 12)
    tau_value = kp.tau(op, trow, 12)
    assert float(record["re_omega1"]) == omega1.real
    assert float(record["im_omega1"]) == omega1.imag
    assert float(record["re_lambda1"]) == lambda1.real
    assert float(record["im_lambda1"]) == lambda1.imag
    assert float(record["re_tau"]) == tau_value.real
    assert float(record["residual"]) == kp.kp_residual(c, trow, 12)
    assert float(record["residual_24"]) == kp.kp_residual(c, trow, 24)


def test_kp_snapshot_roundtrip(tmp_path):
    config = dict(ATOM_CONFIG, horizon=0.2, step=0.01, order=10, m_neg=2, n_psi=2)
    evolve_path = write_config(tmp_path, config, "evolve.json")
    out = tmp_path / "traj"
    assert cli.main(["evolve", "--config", evolve_path, "--out", str(out)]) == 0

    snapshot = str(out / "trajectory.csv")
    kp_config = {
        "f_source": {"snapshot_csv": snapshot, "at_t": 0.1},
        "n": 1,
        "N": 10,
        "t_rows": [[0.02, 0.01, 0.005]],
    }
    kp_path = write_config(tmp_path, kp_config, "kp.json")
    kp_out = tmp_path / "kp"
    assert cli.main(["kp", "--config", kp_path, "--out", str(kp_out)]) == cli.EXIT_OK

    header, rows = read_rows(kp_out / "kp_sweep.csv")
    record = dict(zip(header, rows[0]))
    c = cli._read_snapshot(snapshot, 0.1)
    # the t=0.1 row of the atom trajectory has c_1 = 2 e^{-t} - 2 exactly
    assert abs(c[0] - (2 * np.exp(-0.1) - 2)) < 1e-9
    parts = kp.omega1_and_partials(kp.ABForm.build(c, (0.02, 0.01, 0.005), 10))
    assert float(record["re_omega1"]) == parts[(0, 0, 0)].real
    assert float(record["im_omega1"]) == parts[(0, 0, 0)].imag


def test_kp_grid_parallel_matches_serial(tmp_path):
    config = {
        "f_source": {"c": [0.3, 0.09]},
        "n": 2,
        "N": 10,
        "t_grid": {"t1": [0.01, 0.02], "t2": [0.0, 0.01], "t3": [0.005]},
    }
    path = write_config(tmp_path, config)
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"
    assert cli.main(["kp", "--config", path, "--out", str(serial)]) == cli.EXIT_OK
    code = cli.main(
        ["kp", "--config", path, "--out", str(parallel), "--parallel", "2"]
    )
    assert code == cli.EXIT_OK
    a = (serial / "kp_sweep.csv").read_bytes()
    b = (parallel / "kp_sweep.csv").read_bytes()
    assert a == b
    _, rows = read_rows(serial / "kp_sweep.csv")
    assert len(rows) == 4  # 2 x 2 x 1 grid


def test_kp_near_singular_denominator_exit(tmp_path):
    # c_1 = conj(u)/t_1 with u(1-u) = 1 lands the wave denominator on zero
    u = complex(0.5, np.sqrt(3.0) / 2.0)
    cu = np.conj(u) / 0.1
    config = {
        "f_source": {"c": [[cu.real, cu.imag]]},
        "n": 1,
        "N": 1,
        "t_rows": [[0.1, 0.0, 0.0]],
    }
    path = write_config(tmp_path, config)
    code = cli.main(["kp", "--config", path, "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_NUMERICAL_FAILURE


def test_kp_order_flag_overrides_window(tmp_path):
    config = {
        "f_source": {"c": [0.4]},
        "n": 1,
        "N": 4,
        "t_rows": [[0.05]],
        "convergence_pair": True,
    }
    path = write_config(tmp_path, config)
    out = tmp_path / "out"
    code = cli.main(["kp", "--config", path, "--out", str(out), "--order", "8"])
    assert code == cli.EXIT_OK
    header, _ = read_rows(out / "kp_sweep.csv")
    assert header[-1] == "residual_16"


def test_tau_command_matches_library(tmp_path):
    c = [0.4, 0.16, 0.064]
    config = {"f_source": {"c": c}, "n": 2, "N": 8, "t_rows": [[0.05, 0.03, 0.02]]}
    path = write_config(tmp_path, config)
    out = tmp_path / "out"
    assert cli.main(["tau", "--config", path, "--out", str(out)]) == cli.EXIT_OK
    header, rows = read_rows(out / "tau.csv")
    assert header == ["t1", "t2", "t3", "re_tau", "im_tau"]
    record = dict(zip(header, rows[0]))
    value = kp.tau(step2_graph(c, 2, 8), (0.05, 0.03, 0.02), 8)
    assert float(record["re_tau"]) == value.real
    assert float(record["im_tau"]) == value.imag


# ---------------------------------------------------------------------------
# graph-dump


def test_graph_dump_is_deterministic(tmp_path):
    config = {"c": [0.4, 0.16, 0.064], "n": 2, "N": 8}
    path = write_config(tmp_path, config)
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = cli.main(["graph-dump", "--config", path, "--out", str(out)])
        assert code == cli.EXIT_OK
        blobs.append((out / "graph.json").read_bytes())
    assert blobs[0] == blobs[1]
    payload = json.loads(blobs[0])
    assert payload["n"] == 2 and payload["N"] == 8
    assert len(payload["T"]) == 2 and len(payload["T"][0]) == 9


def test_graph_dump_stdout_mode(tmp_path, capsys):
    config = {"c": [0.3], "n": 1, "N": 4}
    path = write_config(tmp_path, config)
    assert cli.main(["graph-dump", "--config", path]) == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["n"] == 1


def test_graph_dump_requires_c(tmp_path):
    path = write_config(tmp_path, {"n": 1, "N": 4})
    assert cli.main(["graph-dump", "--config", path]) == cli.EXIT_CONFIG_ERROR


# ---------------------------------------------------------------------------
# module entry point


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "shapeflow", "--dump-identities"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
    assert len(lines) == len(checks.registry())
