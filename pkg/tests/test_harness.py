import csv
import io

import numpy as np
import pytest

from decbox.errors import EquivalenceViolation
from decbox.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    check_equivalence,
    csv_text,
    delaunay_square_mesh,
    emit_csv,
    emit_svg_plot,
    fleet_meshes,
    run_convergence,
    run_equivalence_fleet,
)


@pytest.fixture(scope="module")
def crisscross_rows():
    return run_convergence(ExperimentConfig(pattern="crisscross", levels=4, n0=4))


def test_convergence_orders(crisscross_rows):
    rows = crisscross_rows
    assert [r.n for r in rows] == [4, 8, 16, 32]
    assert [r.level for r in rows] == [1, 2, 3, 4]
    assert rows[0].order_energy is None
    last = rows[-1]
    assert 0.9 <= last.order_energy <= 1.1
    assert 1.8 <= last.order_l2 <= 2.2
    energies = [r.energy_err_dec for r in rows]
    assert all(a > b for a, b in zip(energies, energies[1:]))


def test_fem_columns_track_dec(crisscross_rows):
    # smooth f: the two right-hand sides differ, so the errors agree only asymptotically
    for r in crisscross_rows:
        assert r.energy_err_fem == pytest.approx(r.energy_err_dec, rel=0.1)
    assert crisscross_rows[-1].l2_err_fem < crisscross_rows[0].l2_err_fem / 30


def test_row_bookkeeping(crisscross_rows):
    for r in crisscross_rows:
        assert r.h == 1 / r.n
        assert r.n_vertices == (r.n + 1) ** 2 + r.n ** 2
        assert r.n_interior == r.n_vertices - 4 * r.n
        assert r.not_well_centered == 4 * r.n * r.n  # all right triangles


def test_csv_shape_and_determinism(tmp_path):
    cfg = dict(pattern="diagonal", levels=3, n0=2)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_convergence(ExperimentConfig(csv_path=str(a), **cfg))
    run_convergence(ExperimentConfig(csv_path=str(b), **cfg))
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader(io.StringIO(a.read_text())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 4
    assert rows[1][CSV_COLUMNS.index("order_energy")] == ""
    assert float(rows[2][CSV_COLUMNS.index("order_l2")]) > 1.5


def test_csv_round_trips_floats(crisscross_rows):
    parsed = list(csv.DictReader(io.StringIO(csv_text(crisscross_rows))))
    for r, p in zip(crisscross_rows, parsed):
        assert float(p["energy_err_dec"]) == r.energy_err_dec
        assert int(p["n"]) == r.n


def test_empty_rows_write_nothing(tmp_path):
    path = tmp_path / "none.csv"
    with pytest.raises(ValueError):
        emit_csv([], path)
    assert not path.exists()


def test_unwritable_csv(tmp_path, crisscross_rows):
    with pytest.raises(OSError):
        emit_csv(crisscross_rows, tmp_path / "missing" / "x.csv")


def test_svg_plot(tmp_path, crisscross_rows):
    path = tmp_path / "p.svg"
    emit_svg_plot(crisscross_rows, path)
    text = path.read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    assert text.count('class="reference-slope-1"') == 1
    assert text.count('class="reference-slope-2"') == 1
    assert text.count('class="series"') == 4
    emit_svg_plot(crisscross_rows, tmp_path / "q.svg")
    assert (tmp_path / "q.svg").read_bytes() == path.read_bytes()


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(levels=1)
    with pytest.raises(ValueError):
        ExperimentConfig(n0=0)


def test_perturbed_convergence():
    rows = run_convergence(ExperimentConfig(pattern="diagonal", levels=4, n0=4, perturb=0.25, seed=3))
    assert rows[-1].order_energy >= 0.9
    assert any(r.not_well_centered > 0 for r in rows)


def test_fleet_composition():
    fleet = fleet_meshes(0, 20)
    assert len(fleet) == 20
    kinds = {name.split()[0] for name, _ in fleet}
    assert kinds == {"diagonal", "crisscross", "perturbed", "delaunay"}
    names = [name for name, _ in fleet]
    assert names == [name for name, _ in fleet_meshes(0, 20)]


def test_delaunay_mesh_is_valid():
    m = delaunay_square_mesh(8, 0.4, 5)
    assert abs(m.areas.sum() - 1) <= 1e-12
    assert m.euler_characteristic == 1


def test_fleet_passes():
    report = run_equivalence_fleet(seed=0, count=20)
    assert report.passed
    assert report.worst_matrix <= 1e-12
    assert report.worst_rhs <= 1e-13
    assert any(e.not_well_centered for e in report.entries)
    lines = list(report.lines())
    assert len(lines) == 21 and all(ln.startswith("PASS") for ln in lines[:-1])


def test_fault_injection_names_edge():
    with pytest.raises(EquivalenceViolation) as info:
        run_equivalence_fleet(seed=0, count=2, fault_edge=3)
    assert "edge 3" in str(info.value)
    report = info.value.report
    assert not report.entries[0].passed and report.entries[1].passed
    assert report.entries[0].culprit.startswith("edge 3 (1, 2)")


def test_fault_injection_without_raising():
    report = run_equivalence_fleet(seed=0, count=1, fault_edge=4, raise_on_failure=False)
    assert not report.passed
    assert lines_fail(report)


def lines_fail(report):
    return next(iter(report.lines())).startswith("FAIL")


def test_single_check_defaults():
    _, m = fleet_meshes(0, 3)[2]
    e = check_equivalence("x", m, rng=np.random.default_rng(1))
    assert e.passed and e.culprit == ""


def test_identical_systems_give_matching_error_columns():
    # same matrix and same rhs: the error columns agree to the solver tolerance
    from decbox.assembly import assemble_system
    from decbox.dual import build_dual
    from decbox.fields import manufactured
    from decbox.solver import attach_errors, solve_cg

    sol = manufactured("sine")
    tol = 1e-10
    for n in (4, 8, 16, 32):
        m = ExperimentConfig().mesh(n)
        d = build_dual(m)
        errs = [attach_errors(solve_cg(assemble_system(m, d, sol.f, method), tol=tol), m, sol)
                for method in ("dec", "fem")]
        assert abs(errs[0].energy_error - errs[1].energy_error) <= 10 * tol
        assert abs(errs[0].l2_error - errs[1].l2_error) <= 10 * tol
