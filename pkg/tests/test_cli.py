"""Command-line interface: config round-trips, exit codes, JSON reports."""

import json
import math
import struct

import pytest

from henonlocus.cli import RunConfig, config_from_text, config_to_text, run
from henonlocus.errors import ConfigError

PHI = (1.0 + math.sqrt(5.0)) / 2.0


def run_json(capsys, argv):
    """Invoke the CLI and return (exit_code, parsed stdout report)."""
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


# ---------------------------------------------------------------------------
# configuration text format


def test_config_roundtrip_is_lossless():
    cfg = RunConfig(
        "green-grid",
        {"nx": 12, "re_min": -1.5, "kind": "green-minus", "a": [0.01, 0.0]},
    )
    text = config_to_text(cfg)
    back = config_from_text(text)
    assert back == cfg
    assert config_to_text(back) == text


def test_config_ignores_comments_and_blank_lines():
    cfg = config_from_text(
        '# render settings\n\nsubcommand = "verify"\nsamples = 9\n'
    )
    assert cfg.subcommand == "verify"
    assert cfg.options == {"samples": 9}


def test_config_rejects_unknown_key():
    with pytest.raises(ConfigError, match="unknown config keys: frobnicate"):
        config_from_text('subcommand = "verify"\nfrobnicate = 3\n')


def test_config_rejects_malformed_line():
    with pytest.raises(ConfigError, match="key = value"):
        config_from_text('subcommand = "verify"\njust some words\n')


def test_config_rejects_non_json_value():
    with pytest.raises(ConfigError, match="bad value"):
        config_from_text('subcommand = "verify"\nsamples = nine\n')


def test_config_needs_a_subcommand():
    with pytest.raises(ConfigError, match="subcommand"):
        config_from_text("samples = 9\n")
    with pytest.raises(ConfigError, match="unknown subcommand"):
        config_from_text('subcommand = "launch-missiles"\n')


# ---------------------------------------------------------------------------
# exit codes and error reports


def test_missing_subcommand_exits_2(capsys):
    code, report = run_json(capsys, [])
    assert code == 2
    assert report["status"] == "config-error"


def test_unknown_subcommand_exits_2(capsys):
    code, report = run_json(capsys, ["frobnicate"])
    assert code == 2
    assert report["status"] == "config-error"


def test_unknown_flag_exits_2(capsys):
    code, report = run_json(capsys, ["verify", "--no-such-flag", "1"])
    assert code == 2
    assert report["status"] == "config-error"


def test_bad_polynomial_spec_exits_2(capsys):
    code, report = run_json(capsys, ["verify", "--p", "x3+banana"])
    assert code == 2
    assert report["status"] == "config-error"
    assert "polynomial" in report["error"]


def test_missing_config_file_exits_2(capsys, tmp_path):
    code, report = run_json(
        capsys, ["verify", "--config", str(tmp_path / "missing.cfg")]
    )
    assert code == 2
    assert report["status"] == "config-error"


# ---------------------------------------------------------------------------
# verify


def test_verify_core_degenerate_passes(capsys):
    code, report = run_json(capsys, ["verify", "--suite", "core", "--samples", "40"])
    assert code == 0
    assert report["status"] == "ok"
    assert report["max_plus_residual"] < 1e-9
    assert report["max_minus_residual"] < 1e-9


def test_verify_core_nonzero_jacobian(capsys):
    code, report = run_json(
        capsys,
        ["verify", "--suite", "core", "--p", "x2-1", "--a", "0.01", "--samples", "30"],
    )
    assert code == 0
    assert report["max_plus_residual"] < 1e-9
    assert report["max_minus_residual"] < 1e-9


def test_verify_unreachable_tolerance_exits_1(capsys):
    code, report = run_json(
        capsys, ["verify", "--suite", "core", "--samples", "5", "--tol", "1e-30"]
    )
    assert code == 1
    assert report["status"] == "assertion-failed"
    assert report["max_plus_residual"] > 0


def test_verify_unknown_suite_exits_2(capsys):
    code, report = run_json(capsys, ["verify", "--suite", "everything"])
    assert code == 2
    assert report["status"] == "config-error"


def test_verify_is_deterministic_for_fixed_seed(capsys):
    _, first = run_json(capsys, ["verify", "--samples", "12", "--seed", "7"])
    _, again = run_json(capsys, ["verify", "--samples", "12", "--seed", "7"])
    assert first == again
    _, other = run_json(capsys, ["verify", "--samples", "12", "--seed", "8"])
    assert other["max_plus_residual"] != first["max_plus_residual"]


# ---------------------------------------------------------------------------
# green-grid


def test_green_grid_writes_all_outputs(capsys, tmp_path):
    out = tmp_path / "render"
    code, report = run_json(
        capsys,
        [
            "green-grid",
            "--nx", "6",
            "--ny", "5",
            "--re-min", "-2", "--re-max", "2",
            "--im-min", "-1", "--im-max", "1",
            "--out-dir", str(out),
        ],
    )
    assert code == 0
    assert report["width"] == 6 and report["height"] == 5
    pgm = (out / "grid.pgm").read_bytes()
    assert pgm.startswith(b"P5\n6 5\n65535\n")
    assert len(pgm) == len(b"P5\n6 5\n65535\n") + 2 * 6 * 5
    sidecar = json.loads((out / "grid.json").read_text())
    assert sidecar["width"] == 6 and sidecar["height"] == 5
    assert sidecar["min"] == pytest.approx(report["min"])
    csv_lines = (out / "grid.csv").read_text().splitlines()
    assert csv_lines[0] == "x,y,value"
    assert len(csv_lines) == 1 + 6 * 5


def test_green_grid_is_byte_deterministic(capsys, tmp_path):
    argv = ["green-grid", "--nx", "5", "--ny", "4", "--p", "x2-1", "--a", "0.05"]
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    code_a, _ = run_json(capsys, argv + ["--out-dir", str(a_dir), "--workers", "1"])
    code_b, _ = run_json(capsys, argv + ["--out-dir", str(b_dir), "--workers", "3"])
    assert code_a == code_b == 0
    for name in ("grid.pgm", "grid.json", "grid.csv"):
        assert (a_dir / name).read_bytes() == (b_dir / name).read_bytes()


def test_green_grid_bad_kind_exits_2(capsys):
    code, report = run_json(capsys, ["green-grid", "--kind", "heatmap"])
    assert code == 2
    assert report["status"] == "config-error"


def test_config_file_flags_override_file_values(capsys, tmp_path):
    cfg = tmp_path / "render.cfg"
    cfg.write_text('subcommand = "green-grid"\nnx = 8\nny = 7\n')
    out = tmp_path / "out"
    code, report = run_json(
        capsys,
        ["green-grid", "--config", str(cfg), "--ny", "4", "--out-dir", str(out)],
    )
    assert code == 0
    assert report["width"] == 8  # from the file
    assert report["height"] == 4  # flag wins over the file
    assert json.loads((out / "grid.json").read_text())["height"] == 4


def test_config_file_for_wrong_subcommand_exits_2(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text('subcommand = "green-grid"\nx = 4.2\n')  # holonomy-only key
    code, report = run_json(capsys, ["green-grid", "--config", str(cfg)])
    assert code == 2
    assert "unknown config keys" in report["error"]


# ---------------------------------------------------------------------------
# critlocus


def test_critlocus_traces_and_exports(capsys, tmp_path):
    out = tmp_path / "locus"
    code, report = run_json(
        capsys,
        [
            "critlocus",
            "--p", "x2-1",
            "--a", "0.01",
            "--x-min", "10", "--x-max", "100",
            "--step", "0.25",
            "--out-dir", str(out),
        ],
    )
    assert code == 0
    assert report["max_abs_y"] <= report["tube_radius"]
    assert report["max_residual"] < 1e-8
    trace = json.loads((out / "trace.json").read_text())
    assert len(trace["samples"]) == report["samples"]
    csv_lines = (out / "trace.csv").read_text().splitlines()
    assert len(csv_lines) == 1 + report["samples"]


def test_critlocus_degenerate_collapses_to_axis(capsys):
    # At a = 0 the plus-gradient loses its y-component, so the tangency
    # locus is exactly the critical horizontal y = 0.
    code, report = run_json(
        capsys,
        ["critlocus", "--a", "0", "--x-min", "10", "--x-max", "40", "--step", "0.5"],
    )
    assert code == 0
    assert report["max_abs_y"] < 1e-12


# ---------------------------------------------------------------------------
# holonomy


def test_holonomy_reports_orbit_and_witness(capsys):
    code, report = run_json(capsys, ["holonomy", "--n", "1"])
    assert code == 0
    assert report["orbit_size"] == 2
    omega = complex(*report["witness"]["omega"])
    assert abs(omega - (-1.0)) < 1e-8
    assert report["equivariance_deviation"] < 1e-6
    assert len(report["points"]) == 2


# ---------------------------------------------------------------------------
# manifold


def test_manifold_stable_graph_and_index(capsys, tmp_path):
    out = tmp_path / "stable"
    code, report = run_json(
        capsys,
        ["manifold", "--z", repr(PHI), "--out-dir", str(out)],
    )
    assert code == 0
    assert report["index"] == 1
    assert report["side"] == "stable"
    assert 0 < report["graph_deviation"] < 0.05
    saved = json.loads((out / "manifold.json").read_text())
    assert saved["side"] == "stable"


def test_manifold_unstable_graph(capsys):
    history = json.dumps([PHI] * 25)
    code, report = run_json(
        capsys,
        ["manifold", "--side", "unstable", "--history", history, "--a", "0.005"],
    )
    assert code == 0
    assert report["index"] is None
    assert report["graph_deviation"] < 5 * 0.005


def test_manifold_unstable_without_history_exits_2(capsys):
    code, report = run_json(capsys, ["manifold", "--side", "unstable"])
    assert code == 2
    assert "history" in report["error"]


def test_manifold_bad_side_exits_2(capsys):
    code, report = run_json(capsys, ["manifold", "--side", "sideways"])
    assert code == 2


# ---------------------------------------------------------------------------
# rigidity


def test_rigidity_default_checks_golden_text(capsys):
    code, report = run_json(capsys, ["rigidity"])
    assert code == 0
    assert report["golden_match"] is True


def test_rigidity_table_case(capsys):
    code, report = run_json(capsys, ["rigidity", "--case", "beta_ratio"])
    assert code == 0
    assert report["case"]["ok"] is True
    assert report["case"]["order"] == 7
    assert report["case"]["violations_detected"] == report["case"]["random_trials"]


def test_rigidity_partial_solution(capsys):
    code, report = run_json(capsys, ["rigidity", "--partial"])
    assert code == 0
    assert report["partial"]["annihilated"] == [1, 2]


def test_rigidity_unknown_case_exits_2(capsys):
    code, report = run_json(capsys, ["rigidity", "--case", "zeta_zero"])
    assert code == 2
    assert report["status"] == "config-error"


def test_rigidity_defect_listing(capsys, tmp_path):
    out = tmp_path / "rig"
    code, report = run_json(
        capsys,
        ["rigidity", "--defect-order", "3", "--out-dir", str(out)],
    )
    assert code == 0
    assert len(report["defect_coefficients"]) == 3
    assert report["defect_coefficients"][0].startswith("z^1:")
    assert (out / "defect.txt").read_text().strip() == "\n".join(
        report["defect_coefficients"]
    )
