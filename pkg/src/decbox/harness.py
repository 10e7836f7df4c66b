"""Convergence studies and the DEC/FEM/box equivalence fleet, with CSV and SVG output."""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.spatial import Delaunay

from . import assembly
from .calculus import hodge_star_1
from .dual import build_dual, well_centered_report
from .errors import EquivalenceViolation
from .fields import BoxPiecewiseConstant, manufactured
from .mesh import build_mesh, generate_perturbed_mesh, generate_square_mesh
from .solver import DEFAULT_TOL, attach_errors, solve_cg

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "level", "n", "h", "n_vertices", "n_interior",
    "energy_err_dec", "l2_err_dec", "max_err_dec",
    "energy_err_fem", "l2_err_fem", "max_err_fem",
    "order_energy", "order_l2",
)


@dataclass
class ExperimentConfig:
    pattern: str = "crisscross"
    levels: int = 4
    n0: int = 4
    perturb: float = 0.0
    seed: int = 0
    solution: str = "sine"
    quadrature_order: int = 2
    tol: float = DEFAULT_TOL
    csv_path: str = None
    svg_path: str = None

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("need at least 2 levels to estimate an order")
        if self.n0 < 1:
            raise ValueError("n0 must be >= 1")

    def mesh(self, n):
        if self.perturb:
            return generate_perturbed_mesh(n, self.perturb, self.seed, pattern=self.pattern)
        return generate_square_mesh(n, self.pattern)


@dataclass
class ConvergenceRow:
    level: int
    n: int
    h: float
    n_vertices: int
    n_interior: int
    energy_err_dec: float
    l2_err_dec: float
    max_err_dec: float
    energy_err_fem: float
    l2_err_fem: float
    max_err_fem: float
    order_energy: float = None
    order_l2: float = None
    not_well_centered: int = field(default=0, compare=False)

    def values(self):
        return [getattr(self, c) for c in CSV_COLUMNS]


def observed_order(coarse, fine):
    return math.log2(coarse / fine)


def run_level(config, level, n):
    mesh = config.mesh(n)
    dual = build_dual(mesh)
    sol = manufactured(config.solution)
    reports = {}
    # "fem" column: cotangent stiffness with box-integrated rhs, i.e. the box method
    for method in ("dec", "box"):
        system = assembly.assemble_system(mesh, dual, sol.f, method, config.quadrature_order)
        rep = solve_cg(system, tol=config.tol)
        reports[method] = attach_errors(rep, mesh, sol, config.quadrature_order)
    dec, fem = reports["dec"], reports["box"]
    return ConvergenceRow(
        level=level,
        n=n,
        h=1.0 / n,
        n_vertices=mesh.n_vertices,
        n_interior=len(mesh.interior_vertices),
        energy_err_dec=dec.energy_error,
        l2_err_dec=dec.l2_error,
        max_err_dec=dec.max_nodal_error,
        energy_err_fem=fem.energy_error,
        l2_err_fem=fem.l2_error,
        max_err_fem=fem.max_nodal_error,
        not_well_centered=well_centered_report(mesh, dual).n_offenders,
    )


def run_convergence(config):
    """Solve the manufactured problem on ``config.levels`` meshes with ``n = n0 * 2**k``.

    Rows are written to ``config.csv_path`` after every level, so a failing
    level leaves the completed ones on disk before the error propagates.
    """
    rows = []
    for k in range(config.levels):
        n = config.n0 * 2 ** k
        row = run_level(config, k + 1, n)
        if rows:
            prev = rows[-1]
            row.order_energy = observed_order(prev.energy_err_dec, row.energy_err_dec)
            row.order_l2 = observed_order(prev.l2_err_dec, row.l2_err_dec)
        logger.info("level %d n=%d energy=%.3e l2=%.3e not-well-centered=%d",
                    row.level, n, row.energy_err_dec, row.l2_err_dec, row.not_well_centered)
        rows.append(row)
        if config.csv_path:
            emit_csv(rows, config.csv_path)
    if config.svg_path:
        emit_svg_plot(rows, config.svg_path)
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def csv_text(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()


def emit_csv(rows, path):
    if not rows:
        raise ValueError("no rows to write")
    text = csv_text(rows)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def svg_text(rows, width=480, height=360, margin=50):
    """Log-log plot of error against h with dashed slope-1 and slope-2 guides."""
    series = {
        "energy (dec)": ([r.h for r in rows], [r.energy_err_dec for r in rows], "#1f77b4"),
        "L2 (dec)": ([r.h for r in rows], [r.l2_err_dec for r in rows], "#d62728"),
        "energy (fem)": ([r.h for r in rows], [r.energy_err_fem for r in rows], "#17becf"),
        "L2 (fem)": ([r.h for r in rows], [r.l2_err_fem for r in rows], "#ff7f0e"),
    }
    hs = np.log10([r.h for r in rows])
    errs = [e for _, ys, _ in series.values() for e in ys]
    lo, hi = np.log10(min(errs)), np.log10(max(errs))
    hx0, hx1 = hs.min(), hs.max()
    if hx1 == hx0:
        hx0, hx1 = hx0 - 0.5, hx1 + 0.5
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5

    def xy(h, e):
        x = margin + (np.log10(h) - hx0) / (hx1 - hx0) * (width - 2 * margin)
        y = height - margin - (np.log10(e) - lo) / (hi - lo) * (height - 2 * margin)
        return f"{x:.2f},{y:.2f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 10}" text-anchor="middle">h (log)</text>',
        f'<text x="12" y="{height / 2:.0f}" transform="rotate(-90 12 {height / 2:.0f})" '
        f'text-anchor="middle">error (log)</text>',
    ]
    h_first, h_last = rows[0].h, rows[-1].h
    for slope, anchor in ((1, rows[0].energy_err_dec), (2, rows[0].l2_err_dec)):
        e_last = anchor * (h_last / h_first) ** slope
        out.append(
            f'<polyline class="reference-slope-{slope}" points="{xy(h_first, anchor)} '
            f'{xy(h_last, e_last)}" fill="none" stroke="gray" stroke-dasharray="4 3"/>'
        )
    for k, (label, (xs, ys, color)) in enumerate(series.items()):
        pts = " ".join(xy(x, y) for x, y in zip(xs, ys))
        out.append(f'<polyline class="series" points="{pts}" fill="none" stroke="{color}"/>')
        out.append(f'<text x="{width - margin - 110}" y="{margin + 16 + 14 * k}" '
                   f'fill="{color}" font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_plot(rows, path):
    if not rows:
        raise ValueError("no rows to plot")
    text = svg_text(rows)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write SVG to {path}: {exc}") from exc


def delaunay_square_mesh(n, amplitude, seed):
    """Delaunay triangulation of a jittered grid on the unit square."""
    base = generate_perturbed_mesh(n, amplitude, seed)
    tri = Delaunay(base.points)
    return build_mesh(base.points, tri.simplices)


def fleet_meshes(seed=0, count=20):
    """Deterministic mix of diagonal, crisscross, perturbed and Delaunay meshes."""
    rng = np.random.default_rng(seed)
    sizes = (2, 4, 8, 16, 32)
    out = []
    for k in range(count):
        n = sizes[k % len(sizes)]
        kind = k % 4
        s = int(rng.integers(2**31))
        amp = float(rng.uniform(0.2, 0.45))
        if kind == 0:
            out.append((f"diagonal n={n}", generate_square_mesh(n, "diagonal")))
        elif kind == 1:
            out.append((f"crisscross n={n}", generate_square_mesh(n, "crisscross")))
        elif kind == 2:
            out.append((f"perturbed n={n} amp={amp:.3f} seed={s}",
                        generate_perturbed_mesh(n, amp, s)))
        else:
            out.append((f"delaunay n={n} amp={amp:.3f} seed={s}", delaunay_square_mesh(n, amp, s)))
    return out


@dataclass
class FleetEntry:
    name: str
    n_vertices: int
    not_well_centered: int
    matrix: assembly.Comparison
    rhs: assembly.Comparison
    passed: bool
    culprit: str = ""


@dataclass
class FleetReport:
    entries: list
    matrix_tol: float
    rhs_tol: float

    @property
    def passed(self):
        return all(e.passed for e in self.entries)

    @property
    def worst_matrix(self):
        return max(e.matrix.max_abs / e.matrix.scale for e in self.entries)

    @property
    def worst_rhs(self):
        return max(e.rhs.max_abs for e in self.entries)

    def lines(self):
        for e in self.entries:
            status = "PASS" if e.passed else "FAIL"
            yield (f"{status} {e.name}: N0={e.n_vertices} not-well-centered={e.not_well_centered} "
                   f"matrix rel={e.matrix.max_abs / e.matrix.scale:.2e} rhs abs={e.rhs.max_abs:.2e}"
                   + (f" [{e.culprit}]" if e.culprit else ""))
        yield f"worst matrix rel diff {self.worst_matrix:.3e}, worst rhs diff {self.worst_rhs:.3e}"


def _culprit(mesh, a, b, tol):
    # name the worst off-diagonal (edge) entry when one is out of tolerance
    diff = sp.coo_matrix(sp.csr_matrix(a) - sp.csr_matrix(b))
    off = diff.row != diff.col
    if np.any(off) and np.abs(diff.data[off]).max() > tol:
        k = np.flatnonzero(off)[np.argmax(np.abs(diff.data[off]))]
        i, j = sorted((int(diff.row[k]), int(diff.col[k])))
        try:
            return f"edge {mesh.edge_id(i, j)} ({i}, {j})"
        except KeyError:
            return f"entry ({i}, {j})"
    k = int(np.argmax(np.abs(diff.data)))
    return f"vertex {diff.row[k]}"


def check_equivalence(name, mesh, dual=None, rng=None, matrix_tol=1e-12, rhs_tol=1e-13,
                      star1=None):
    """Compare DEC against FEM stiffness and DEC against box rhs on one mesh."""
    dual = build_dual(mesh) if dual is None else dual
    rng = np.random.default_rng(0) if rng is None else rng
    s1 = hodge_star_1(mesh, dual) if star1 is None else star1
    a_dec = assembly.assemble_dec(mesh, dual, s1)
    a_fem = assembly.assemble_fem(mesh)
    mat = assembly.compare_matrices(a_dec, a_fem)
    f = BoxPiecewiseConstant(rng.uniform(-2.0, 2.0, mesh.n_vertices))
    rhs = assembly.compare_vectors(assembly.assemble_rhs_dec(mesh, dual, f),
                                   assembly.assemble_rhs_box(mesh, dual, f))
    passed = mat.within(matrix_tol) and rhs.max_abs <= rhs_tol
    culprit = ""
    if not mat.within(matrix_tol):
        culprit = _culprit(mesh, a_dec, a_fem, matrix_tol * mat.scale)
    return FleetEntry(name, mesh.n_vertices, well_centered_report(mesh, dual).n_offenders,
                      mat, rhs, passed, culprit)


def run_equivalence_fleet(seed=0, count=20, matrix_tol=1e-12, rhs_tol=1e-13, fault_edge=None,
                          raise_on_failure=True):
    """Check DEC == FEM (matrix) and DEC == box (rhs, box-piecewise-constant f) on a fleet.

    ``fault_edge`` flips the sign of that edge's Hodge-1 entry on the first
    mesh, as a self-test of the detector.

    Raises
    ------
    EquivalenceViolation
        Carrying the full :class:`FleetReport` and naming the worst entry.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed + 1)
    entries = []
    for k, (name, mesh) in enumerate(fleet_meshes(seed, count)):
        dual = build_dual(mesh)
        star1 = None
        if fault_edge is not None and k == 0:
            star1 = hodge_star_1(mesh, dual).tolil()
            star1[fault_edge, fault_edge] = -star1[fault_edge, fault_edge]
            star1 = star1.tocsr()
        entries.append(check_equivalence(name, mesh, dual, rng, matrix_tol, rhs_tol, star1))
    report = FleetReport(entries, matrix_tol, rhs_tol)
    if raise_on_failure and not report.passed:
        bad = next(e for e in entries if not e.passed)
        raise EquivalenceViolation(f"{bad.name}: {bad.matrix} [{bad.culprit}]", report)
    return report
