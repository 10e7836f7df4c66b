"""Assembly of the DEC, linear-FEM and box-method Poisson systems."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _robust, calculus
from .errors import DegenerateTriangle, DimensionMismatch, NoInteriorVertices
from .mesh import DEGENERACY_TOL
from .quadrature import points_and_weights

METHODS = ("dec", "fem", "box")


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Reduced system on interior vertices after homogeneous Dirichlet elimination.

    ``interior_map[k]`` is the global vertex id of unknown ``k``.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    interior_map: np.ndarray
    method: str
    n_vertices: int

    @property
    def size(self):
        return len(self.interior_map)

    def expand(self, x):
        """Scatter an interior solution into a full nodal vector (boundary = 0)."""
        full = np.zeros(self.n_vertices)
        full[self.interior_map] = x
        return full


def _checked_weights(corners, what):
    corners = np.asarray(corners, dtype=float)
    sq = np.stack([np.sum((corners[:, (p + 1) % 3] - corners[:, (p + 2) % 3]) ** 2, axis=1)
                   for p in range(3)], axis=1)
    weights, twice_area = _robust.half_cotangents(corners)
    bad = np.abs(twice_area) < DEGENERACY_TOL * sq.max(axis=1)
    if np.any(bad):
        raise DegenerateTriangle(f"cotangent weight of a degenerate {what(int(np.argmax(bad)))}")
    return weights


def fem_weights(mesh):
    """Cotangent weights ``d_p = l_j l_k cos(theta_p) / (4 |t|)`` for every triangle corner.

    ``l_j l_k cos(theta_p)`` is the dot product of the two edge vectors
    leaving corner ``p``. Both it and the area are accumulated in
    compensated arithmetic, so sliver triangles keep full accuracy.
    """
    return _checked_weights(mesh.points[mesh.triangles], lambda k: f"triangle {k}")


def fem_local_weights(t, mesh):
    """``(d0, d1, d2)`` of triangle ``t``."""
    corners = mesh.points[mesh.triangles[t]][None]
    return tuple(float(d) for d in _checked_weights(corners, lambda k: f"triangle {t}")[0])


def assemble_fem(mesh, weights=None):
    """Full linear-element stiffness matrix (N0 x N0) from cotangent weights.

    The weight ``d_p`` couples the two corners of the edge opposite ``p``:
    ``-d_p`` off the diagonal and ``+d_p`` on both diagonals.
    """
    d = fem_weights(mesh) if weights is None else weights
    tris = mesh.triangles
    rows, cols, vals = [], [], []
    for p in range(3):
        i = tris[:, (p + 1) % 3]
        j = tris[:, (p + 2) % 3]
        w = d[:, p]
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [-w, -w, w, w]
    n = mesh.n_vertices
    a = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return calculus._finalize(a)


def assemble_dec(mesh, dual, star1=None):
    """Full DEC Laplacian ``-D1_dual * star_1 * D0`` by sparse composition."""
    d0 = calculus.derivative_0(mesh).astype(float)
    dd1 = calculus.dual_derivative_1(mesh).astype(float)
    s1 = calculus.hodge_star_1(mesh, dual) if star1 is None else star1
    return calculus._finalize(-(dd1 @ (s1 @ d0)))


def assemble_rhs_dec(mesh, dual, f):
    """Nodal right-hand side ``|b_i| f(x_i)``."""
    values = f.sample(mesh.points, owners=np.arange(mesh.n_vertices))
    return dual.box_areas * values


def _kite_halves(mesh, dual):
    # two signed sub-triangles per (triangle, corner): (x_p, m_next, C), (x_p, C, m_prev)
    corners = mesh.points[mesh.triangles]
    c = dual.circumcenters
    halves, owners = [], []
    for p in range(3):
        x = corners[:, p]
        m_next = 0.5 * (x + corners[:, (p + 1) % 3])
        m_prev = 0.5 * (x + corners[:, (p + 2) % 3])
        halves.append(np.stack([x, m_next, c], axis=1))
        halves.append(np.stack([x, c, m_prev], axis=1))
        owners += [mesh.triangles[:, p]] * 2
    halves = np.stack(halves, axis=1).reshape(-1, 3, 2)
    owners = np.stack(owners, axis=1).ravel()
    return halves, owners


def assemble_rhs_box(mesh, dual, f, quadrature_order=2):
    """Box integrals ``int_{b_i} f`` by quadrature on the signed kite halves."""
    halves, owners = _kite_halves(mesh, dual)
    a, b, c = halves[:, 0], halves[:, 1], halves[:, 2]
    area = 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
    pts, w = points_and_weights(halves, quadrature_order, area)
    q = pts.shape[1]
    vals = f.sample(pts.reshape(-1, 2), owners=np.repeat(owners, q)).reshape(-1, q)
    contrib = np.sum(w * vals, axis=1)
    rhs = np.zeros(mesh.n_vertices)
    np.add.at(rhs, owners, contrib)
    return rhs


def apply_dirichlet(matrix, rhs, mesh, method="dec"):
    """Eliminate boundary rows and columns (homogeneous data, no rhs correction)."""
    interior = mesh.interior_vertices
    if len(interior) == 0:
        raise NoInteriorVertices("mesh has no interior vertices")
    m = sp.csr_matrix(matrix)
    reduced = calculus._finalize(m[interior][:, interior])
    return LinearSystem(reduced, np.asarray(rhs, float)[interior], interior, method, mesh.n_vertices)


def assemble_system(mesh, dual, f, method="dec", quadrature_order=2):
    """Reduced system for one of the three methods.

    ``dec``: DEC operator, nodal rhs ``|b_i| f(x_i)``.
    ``fem``: cotangent stiffness, same nodal rhs.
    ``box``: cotangent stiffness, box integrals of ``f``.
    """
    if method == "dec":
        a, b = assemble_dec(mesh, dual), assemble_rhs_dec(mesh, dual, f)
    elif method == "fem":
        a, b = assemble_fem(mesh), assemble_rhs_dec(mesh, dual, f)
    elif method == "box":
        a, b = assemble_fem(mesh), assemble_rhs_box(mesh, dual, f, quadrature_order)
    else:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    return apply_dirichlet(a, b, mesh, method)


@dataclass
class Comparison:
    max_abs: float
    max_rel: float
    location: tuple
    scale: float

    def within(self, tol):
        """True when ``max_abs <= tol * scale`` (relative to the largest entry)."""
        return self.max_abs <= tol * self.scale

    def __str__(self):
        return (f"max |diff| = {self.max_abs:.3e} at {self.location}, "
                f"relative {self.max_rel:.3e} (scale {self.scale:.6g})")


def compare_matrices(a, b):
    """Entrywise comparison over the union of both sparsity patterns."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    a = sp.csr_matrix(a, dtype=float)
    b = sp.csr_matrix(b, dtype=float)
    diff = sp.coo_matrix(a - b)
    scale = max(abs(a).max() if a.nnz else 0.0, abs(b).max() if b.nnz else 0.0)
    if diff.nnz == 0:
        return Comparison(0.0, 0.0, None, scale)
    k = int(np.argmax(np.abs(diff.data)))
    max_abs = float(abs(diff.data[k]))
    return Comparison(max_abs, max_abs / scale if scale else np.inf,
                      (int(diff.row[k]), int(diff.col[k])), scale)


def compare_vectors(a, b):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    d = np.abs(a - b)
    scale = float(max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0)))
    if d.size == 0:
        return Comparison(0.0, 0.0, None, scale)
    k = int(np.argmax(d))
    return Comparison(float(d[k]), float(d[k]) / scale if scale else 0.0, (k,), scale)


def is_symmetric(a, rtol=1e-13):
    a = sp.csr_matrix(a, dtype=float)
    d = a - a.T
    if d.nnz == 0:
        return True
    return abs(d).max() <= rtol * abs(a).max()
