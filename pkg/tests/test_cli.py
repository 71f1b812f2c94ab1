import csv
import os

import numpy as np
import pytest

from pcurlcurl.cli import main
from pcurlcurl.io import (OUTPUT_ROOT_ENV, ConfigError, RunConfig,
                          parse_config_file, write_vtk)
from pcurlcurl.assembly import edge_interpolate
from pcurlcurl.mesh import build_box_mesh
from pcurlcurl.mms import case_p2_sine


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_solve_writes_outputs_and_meets_tolerance(tmp_path):
    out = tmp_path / "run"
    rc = main(["solve", "--out_dir", str(out), "--divisions", "2,2,2"])
    assert rc == 0
    for name in ("solution.vtk", "report.csv", "summary.txt",
                 "config_used.txt"):
        assert (out / name).exists()
    rows = read_csv(out / "report.csv")
    assert float(rows[-1]["residual"]) <= 1e-9
    assert int(rows[0]["newton_iter"]) == 1      # p = 2 is linear


def test_solve_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["solve", "--out_dir", str(a), "--divisions", "2,2,2"]) == 0
    assert main(["solve", "--out_dir", str(b), "--divisions", "2,2,2"]) == 0
    assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()
    assert (a / "solution.vtk").read_bytes() == (b / "solution.vtk").read_bytes()


def test_invalid_p_exits_2(tmp_path, capsys):
    rc = main(["solve", "--out_dir", str(tmp_path / "x"), "--p", "1.5",
               "--case", "general_p"])
    assert rc == 2
    assert "p >= 2" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    rc = main(["solve", "--out_dir", str(tmp_path / "x"), "--frobnicate", "1"])
    assert rc == 2
    assert "unknown key" in capsys.readouterr().err


def test_threads_other_than_one_rejected(tmp_path):
    rc = main(["solve", "--out_dir", str(tmp_path / "x"), "--threads", "4"])
    assert rc == 2


def test_verify_command_csv_contract(tmp_path):
    out = tmp_path / "v"
    rc = main(["verify", "--out_dir", str(out), "--n_samples", "20000",
               "--divisions", "2,2,2", "--green_levels", "2",
               "--p_grid", "2,4"])
    assert rc == 0
    rows = read_csv(out / "inequalities.csv")
    assert all(int(r["violations"]) == 0 for r in rows)
    p2 = [r for r in rows if float(r["p"]) == 2.0 and float(r["delta"]) == 0.0]
    assert len(p2) == 2
    for r in p2:
        assert abs(float(r["worst_ratio"]) - 1.0) <= 1e-12


def test_verify_seeded_rerun_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["--n_samples", "5000", "--divisions", "2,2,2",
            "--green_levels", "2", "--p_grid", "3", "--seed", "9"]
    assert main(["verify", "--out_dir", str(a)] + args) == 0
    assert main(["verify", "--out_dir", str(b)] + args) == 0
    assert (a / "inequalities.csv").read_bytes() == \
        (b / "inequalities.csv").read_bytes()


def test_friedrich_command(tmp_path):
    out = tmp_path / "f"
    rc = main(["friedrich", "--out_dir", str(out), "--levels", "2,4,8"])
    assert rc == 0
    rows = read_csv(out / "friedrich.csv")
    assert len(rows) == 3
    last = float(rows[-1]["C_h"])
    assert abs(last - 1 / np.sqrt(2)) / (1 / np.sqrt(2)) <= 0.05


def test_converge_command_monotone_errors(tmp_path):
    out = tmp_path / "c"
    rc = main(["converge", "--out_dir", str(out), "--levels", "2,4"])
    assert rc == 0
    rows = read_csv(out / "converge.csv")
    errs = [float(r["curl_lp_error"]) for r in rows]
    assert errs == sorted(errs, reverse=True)
    l2s = [float(r["l2_error"]) for r in rows]
    assert l2s == sorted(l2s, reverse=True)


def test_solver_failure_exits_1_and_flags_partial_output(tmp_path, capsys):
    # an impossible Newton budget forces a stage failure
    out = tmp_path / "fail"
    rc = main(["solve", "--out_dir", str(out), "--divisions", "2,2,2",
               "--case", "general_p", "--p", "6", "--max_newton", "1"])
    assert rc == 1
    summary = (out / "summary.txt").read_text()
    assert "FAILED" in summary
    assert not (out / "solution.vtk").exists()


def test_missing_output_dir_created(tmp_path):
    out = tmp_path / "deep" / "nested" / "dir"
    rc = main(["solve", "--out_dir", str(out), "--divisions", "1,1,1"])
    assert rc == 0
    assert (out / "summary.txt").exists()


def test_output_root_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path))
    rc = main(["solve", "--out_dir", "relative_run", "--divisions", "1,1,1"])
    assert rc == 0
    assert (tmp_path / "relative_run" / "summary.txt").exists()


def test_config_file_plus_override(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        "# demo config\ndivisions = 2,2,2\nbox_extents = pi,pi,pi\n"
        "newton_tol = 1e-8\n")
    out = tmp_path / "out"
    rc = main(["solve", "--config", str(cfgfile), "--out_dir", str(out),
               "--newton_tol", "1e-10"])
    assert rc == 0
    echoed = parse_config_file(out / "config_used.txt")
    assert float(echoed["newton_tol"]) == 1e-10  # override wins
    assert echoed["divisions"] == "2,2,2"


def test_runconfig_validation_messages():
    with pytest.raises(ConfigError, match="unknown key"):
        RunConfig.load("solve", overrides={"nope": "1"})
    with pytest.raises(ConfigError, match="divisions"):
        RunConfig.load("solve", overrides={"divisions": "0,1,1"})
    with pytest.raises(ConfigError, match="bad value"):
        RunConfig.load("solve", overrides={"newton_tol": "abc"})


def test_vtk_structure(tmp_path):
    mesh = build_box_mesh((1, 1, 1))
    u = edge_interpolate(case_p2_sine().u_exact, mesh)
    path = tmp_path / "f.vtk"
    write_vtk(path, mesh, u)
    text = path.read_text().splitlines()
    assert text[0].startswith("# vtk DataFile")
    assert "DATASET UNSTRUCTURED_GRID" in text
    assert f"POINTS {mesh.num_vertices} double" in text
    assert f"CELLS {mesh.num_tets} {5 * mesh.num_tets}" in text
    idx = text.index(f"CELL_TYPES {mesh.num_tets}")
    assert all(t == "10" for t in text[idx + 1:idx + 1 + mesh.num_tets])
    assert f"CELL_DATA {mesh.num_tets}" in text
    assert f"POINT_DATA {mesh.num_vertices}" in text
