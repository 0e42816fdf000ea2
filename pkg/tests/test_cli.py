import os
import subprocess
import sys

import numpy as np
import pytest

from kveit.cli import main
from kveit.io import read_vtk_points

SHORT = ["--level", "4,8"]


def _short_config(tmp_path, extra=""):
    path = tmp_path / "short.ini"
    path.write_text("[run]\ndata_level = 32\n[armijo]\nmax_iter = 10\n" + extra)
    return str(path)


def test_mesh_info(capsys):
    assert main(["mesh-info", "--level", "4"]) == 0
    assert capsys.readouterr().out.strip() == "25 nodes, 32 triangles, h=0.7071"


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "kveit", "mesh-info", "--level", "64"],
                         capture_output=True, text=True, check=True).stdout
    assert out.strip() == "4225 nodes, 8192 triangles, h=0.0442"


def test_forward(tmp_path, capsys):
    assert main(["forward", "--level", "8", "--out", str(tmp_path)]) == 0
    assert sorted(os.listdir(tmp_path)) == ["forward_l8.vtk", "forward_l8_boundary.csv", "manifest.ini"]
    _, data = read_vtk_points(tmp_path / "forward_l8.vtk")
    assert np.abs(data["u_N"] - data["u_D"]).max() < 1e-9
    # a conductivity file is accepted in place of the phantom
    qfile = tmp_path / "forward_l8.vtk"
    out2 = tmp_path / "again"
    cfg = tmp_path / "q.ini"
    cfg.write_text(f"[problem]\nq_file = {qfile}\n")
    assert main(["forward", "--level", "8", "--config", str(cfg), "--out", str(out2)]) == 0
    _, data2 = read_vtk_points(out2 / "forward_l8.vtk")
    assert np.array_equal(data2["q"], data["q"])
    assert main(["forward", "--level", "4", "--config", str(cfg), "--out", str(out2)]) == 2


def test_example1_file_contract(tmp_path):
    cfg = _short_config(tmp_path)
    out = tmp_path / "ex1"
    assert main(["example", "1", "--level", "4,8,16,32", "--config", cfg, "--out", str(out)]) == 0
    files = sorted(os.listdir(out))
    assert files.count("example1_table.csv") == 1 and "manifest.ini" in files
    assert len([f for f in files if f.startswith("history_")]) == 4
    assert len([f for f in files if f.endswith(".vtk")]) >= 4
    table = (out / "example1_table.csv").read_text().splitlines()
    assert len(table) == 5 and table[0].startswith("level,h,rho,delta")


def test_example1_full_ladder_file_contract(tmp_path):
    path = tmp_path / "five.ini"
    path.write_text("[run]\nlevels = 4, 8, 16, 32, 64\n[armijo]\nmax_iter = 2\n")
    out = tmp_path / "ex1"
    assert main(["example", "1", "--config", str(path), "--solver", "direct", "--out", str(out)]) == 0
    files = os.listdir(out)
    assert len([f for f in files if f.endswith("_table.csv")]) == 1
    assert len([f for f in files if f.startswith("history_")]) == 5
    assert len([f for f in files if f.endswith(".vtk")]) >= 5
    assert "manifest.ini" in files


def test_rerun_from_manifest_is_byte_identical(tmp_path):
    cfg = _short_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["reconstruct", *SHORT, "--theta", "0.05", "--seed", "3", "--config", cfg, "--out", str(a)]) == 0
    assert main(["reconstruct", "--config", str(a / "manifest.ini"), "--out", str(b)]) == 0
    for name in os.listdir(a):
        if name.endswith(".csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_examples_2_and_3_names(tmp_path):
    cfg = _short_config(tmp_path, "[noise]\nthetas = 0.01, 0.1\nsizes = 1, 6\n")
    out = tmp_path / "o"
    assert main(["example", "2", "--level", "4", "--config", cfg, "--out", str(out)]) == 0
    assert {"history_theta0.01_l4.csv", "history_theta0.1_l4.csv"} <= set(os.listdir(out))
    assert main(["example", "3", "--level", "4", "--config", cfg, "--out", str(out)]) == 0
    assert {"history_I1_l4.csv", "history_I6_l4.csv", "example3_table.csv"} <= set(os.listdir(out))


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[armijo]\nbeta0 = 1.5\n")
    assert main(["reconstruct", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert main(["reconstruct", "--config", str(tmp_path / "nope.ini")]) == 2
    assert main(["reconstruct", "--level", "4,6"]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["reconstruct", *SHORT, "--out", str(blocker / "sub")]) == 4
    assert not (tmp_path / "x").exists()


def test_solver_failure_exit_code(tmp_path, monkeypatch):
    from kveit import cli
    from kveit.errors import SolverFailure

    def boom(*args, **kwargs):
        raise SolverFailure("no convergence", 1.0, 5)

    monkeypatch.setattr(cli, "run_ladder", boom)
    out = tmp_path / "o"
    assert main(["reconstruct", *SHORT, "--out", str(out)]) == 3
    assert os.listdir(out) == []


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as err:
        main(["explode"])
    assert err.value.code == 2
