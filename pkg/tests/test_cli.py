import json
import subprocess
import sys

import pytest

from decbox.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main
from decbox.mesh import load_mesh


@pytest.fixture
def crisscross4(tmp_path):
    path = tmp_path / "cc4.json"
    assert main(["gen", "--n", "4", "--pattern", "crisscross", "-o", str(path)]) == EXIT_OK
    return path


def test_gen_writes_mesh(tmp_path, capsys):
    path = tmp_path / "m.json"
    assert main(["gen", "--n", "3", "--perturb", "0.3", "--seed", "2", "-o", str(path)]) == 0
    assert "N0=16 N1=33 N2=18" in capsys.readouterr().out
    assert load_mesh(path).counts == (16, 33, 18)


def test_gen_bad_shape(tmp_path):
    assert main(["gen", "--shape", "disk", "--n", "3", "-o", str(tmp_path / "x.json")]) == EXIT_VALIDATION


def test_check_reports(crisscross4, tmp_path, capsys):
    dump = tmp_path / "dual.txt"
    assert main(["check", str(crisscross4), "--dump-dual", str(dump)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "euler characteristic 1" in out
    assert "interior vertices 25" in out
    assert dump.read_text().strip()


def test_check_rejects_bad_mesh(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"vertices": [[0, 0], [1, 0], [0, 1]], "triangles": [[0, 1, 7]]}))
    assert main(["check", str(path)]) == EXIT_VALIDATION
    assert "triangles[0][2]" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert main(["check", str(tmp_path / "nope.json")]) == EXIT_VALIDATION


@pytest.mark.parametrize("method", ["dec", "fem", "box"])
def test_solve_methods(crisscross4, tmp_path, capsys, method):
    out_csv = tmp_path / "u.csv"
    code = main(["solve", str(crisscross4), "--method", method, "--dump-solution", str(out_csv)])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    fields = dict(line.split(" = ") for line in text.splitlines())
    assert fields["method"] == method
    assert int(fields["n_unknowns"]) == 25
    assert float(fields["relative_residual"]) <= 1e-10
    assert float(fields["l2_error"]) < 0.05
    assert len(out_csv.read_text().splitlines()) == 42


def test_solve_crisscross_n1(tmp_path, capsys):
    path = tmp_path / "one.json"
    main(["gen", "--n", "1", "--pattern", "crisscross", "-o", str(path)])
    out_csv = tmp_path / "u.csv"
    assert main(["solve", str(path), "--f", "1", "--dump-solution", str(out_csv)]) == EXIT_OK
    last = out_csv.read_text().splitlines()[-1].split(",")
    assert abs(float(last[3]) - 0.125) <= 1e-12


def test_solve_without_interior(tmp_path, capsys):
    path = tmp_path / "d1.json"
    main(["gen", "--n", "1", "-o", str(path)])
    assert main(["solve", str(path), "--f", "1"]) == EXIT_OK
    assert "no interior vertices" in capsys.readouterr().out


def test_solve_bad_source(crisscross4):
    assert main(["solve", str(crisscross4), "--f", "banana"]) == EXIT_VALIDATION


def test_solve_iteration_failure(crisscross4, capsys):
    # an unreachable tolerance exhausts the iteration budget
    assert main(["solve", str(crisscross4), "--tol", "1e-30"]) == EXIT_NUMERICAL
    assert "error:" in capsys.readouterr().err


def test_compare(crisscross4, tmp_path, capsys):
    export = tmp_path / "ops"
    assert main(["compare", str(crisscross4), "--export", str(export)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("PASS")
    assert "stiffness DEC vs FEM" in out
    names = sorted(p.name for p in export.iterdir())
    assert "stiffness_dec.txt" in names and "hodge_star_1.txt" in names


def test_converge_outputs(tmp_path, capsys):
    out, plot = tmp_path / "c.csv", tmp_path / "c.svg"
    args = ["converge", "--levels", "3", "--n0", "2", "--out", str(out), "--plot", str(plot)]
    assert main(args) == EXIT_OK
    first = out.read_bytes()
    assert len(first.decode().splitlines()) == 4
    assert "reference-slope-2" in plot.read_text()
    assert main(args) == EXIT_OK
    assert out.read_bytes() == first
    assert "order_energy=" in capsys.readouterr().out


def test_converge_bad_output_dir(tmp_path):
    code = main(["converge", "--levels", "2", "--n0", "2", "--out", str(tmp_path / "no" / "c.csv")])
    assert code == EXIT_VALIDATION


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_module_entry_point(tmp_path):
    path = tmp_path / "m.json"
    proc = subprocess.run([sys.executable, "-m", "decbox", "gen", "--n", "2", "-o", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert path.exists()
