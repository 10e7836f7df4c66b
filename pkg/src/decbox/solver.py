"""Conjugate-gradient solve and discrete error norms."""

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import MaxIterations, NotPositiveDefinite
from .quadrature import points_and_weights, rule

DEFAULT_TOL = 1e-10


@dataclass
class SolveReport:
    solution: np.ndarray
    method: str
    iterations: int
    residual: float
    wall_time: float
    n_unknowns: int = None
    energy_error: float = None
    l2_error: float = None
    max_nodal_error: float = None
    extra: dict = field(default_factory=dict)

    def to_text(self):
        """Flat ``key = value`` block."""
        items = {
            "method": self.method,
            "n_unknowns": self.n_unknowns,
            "iterations": self.iterations,
            "relative_residual": self.residual,
            "energy_error": self.energy_error,
            "l2_error": self.l2_error,
            "max_nodal_error": self.max_nodal_error,
            "wall_time_s": self.wall_time,
            **self.extra,
        }
        return "".join(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n"
                       for k, v in items.items() if v is not None)


def conjugate_gradient(matrix, b, tol=DEFAULT_TOL, max_iter=None):
    """Unpreconditioned CG from a zero initial guess.

    Stops when ``||b - A x|| <= tol ||b||``. Returns ``(x, iterations,
    relative_residual)``.

    Raises
    ------
    NotPositiveDefinite
        If a search direction has non-positive curvature ``p.A p``.
    MaxIterations
    """
    b = np.asarray(b, dtype=float)
    n = len(b)
    if max_iter is None:
        max_iter = 10 * max(n, 1)
    x = np.zeros(n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x, 0, 0.0
    r = b.copy()
    p = r.copy()
    rr = r @ r
    for it in range(1, max_iter + 1):
        ap = matrix @ p
        curvature = p @ ap
        if curvature <= 0.0:
            raise NotPositiveDefinite(f"non-positive curvature {curvature:.3e} at iteration {it}")
        alpha = rr / curvature
        x += alpha * p
        r -= alpha * ap
        rr_new = r @ r
        if np.sqrt(rr_new) <= tol * bnorm:
            # confirm against the true residual, not the recurrence
            true = np.linalg.norm(b - matrix @ x) / bnorm
            if true <= tol:
                return x, it, float(true)
            r = b - matrix @ x
            rr_new = r @ r
            p = r.copy()
            rr = rr_new
            continue
        p = r + (rr_new / rr) * p
        rr = rr_new
    res = np.linalg.norm(b - matrix @ x) / bnorm
    raise MaxIterations(f"no convergence in {max_iter} iterations (relative residual {res:.3e})")


def solve_cg(system, tol=DEFAULT_TOL, max_iter=None):
    """Solve a reduced :class:`~decbox.assembly.LinearSystem`; the report
    holds the full nodal vector with zero boundary values."""
    start = time.perf_counter()
    x, it, res = conjugate_gradient(system.matrix, system.rhs, tol, max_iter)
    return SolveReport(
        solution=system.expand(x),
        method=system.method,
        iterations=it,
        residual=res,
        wall_time=time.perf_counter() - start,
        n_unknowns=system.size,
    )


def gradients(mesh, v):
    """Constant gradient of the linear interpolant of ``v`` on every triangle, (N2, 2)."""
    v = np.asarray(v, dtype=float)
    corners = mesh.points[mesh.triangles]
    two_area = 2.0 * mesh.signed_areas
    g = np.zeros((mesh.n_triangles, 2))
    for p in range(3):
        # grad phi_p is the opposite edge rotated by -90 degrees over 2|t|
        e = corners[:, (p + 2) % 3] - corners[:, (p + 1) % 3]
        g += v[mesh.triangles[:, p], None] * np.column_stack([-e[:, 1], e[:, 0]])
    return g / two_area[:, None]


def energy_norm(mesh, v):
    """``sqrt(int |grad v|^2)`` of the piecewise-linear interpolant."""
    g = gradients(mesh, v)
    return float(np.sqrt(np.sum(mesh.areas * np.sum(g * g, axis=1))))


def _interpolant_at(mesh, v, order):
    corners = mesh.points[mesh.triangles]
    pts, w = points_and_weights(corners, order, mesh.areas)
    bary, _ = rule(order)
    vals = np.einsum("qk,mk->mq", bary, np.asarray(v, float)[mesh.triangles])
    return pts, w, vals


def l2_error(mesh, v, reference, quadrature_order=2):
    """``||v_lin - reference||_{L2}`` by triangle quadrature."""
    pts, w, vals = _interpolant_at(mesh, v, quadrature_order)
    diff = vals - reference(pts[..., 0], pts[..., 1])
    return float(np.sqrt(np.sum(w * diff * diff)))


def energy_error(mesh, v, reference_gradient, quadrature_order=2):
    """``||grad v_lin - grad u||_{L2}`` by triangle quadrature."""
    corners = mesh.points[mesh.triangles]
    pts, w = points_and_weights(corners, quadrature_order, mesh.areas)
    g = gradients(mesh, v)
    diff = g[:, None, :] - reference_gradient(pts[..., 0], pts[..., 1])
    return float(np.sqrt(np.sum(w * np.sum(diff * diff, axis=-1))))


def max_nodal_error(mesh, v, reference):
    return float(np.max(np.abs(np.asarray(v) - reference(mesh.points[:, 0], mesh.points[:, 1]))))


def attach_errors(report, mesh, solution, quadrature_order=2):
    """Fill the error fields of ``report`` against a manufactured solution."""
    v = report.solution
    report.energy_error = energy_error(mesh, v, solution.grad, quadrature_order)
    report.l2_error = l2_error(mesh, v, solution.u, quadrature_order)
    report.max_nodal_error = max_nodal_error(mesh, v, solution.u)
    return report


def write_solution_csv(mesh, v, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "x", "y", "value"])
        for i, (p, val) in enumerate(zip(mesh.points, v)):
            w.writerow([i, repr(float(p[0])), repr(float(p[1])), repr(float(val))])
