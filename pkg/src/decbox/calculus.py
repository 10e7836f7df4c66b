"""Chains, cochains, boundary operators, exterior derivatives and diagonal Hodge stars.

Operators are ``scipy.sparse`` CSR matrices. Incidence matrices carry integer
entries so that compositions such as ``boundary_1 @ boundary_2`` vanish
exactly. Dual cochains are indexed by their primal generators: a dual
1-cochain by primal edge, a dual 2-cochain by primal vertex.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch

PRIMAL = "primal"
DUAL = "dual"


def _finalize(a):
    a = sp.csr_matrix(a)
    a.sum_duplicates()
    a.eliminate_zeros()
    a.sort_indices()
    return a


def boundary_2(mesh):
    """Triangle -> edge incidence, shape (N1, N2), entries +-1.

    For a triangle ``[v0, v1, v2]`` the boundary is
    ``[v1, v2] - [v0, v2] + [v0, v1]``, i.e. each edge is traversed
    cyclically as ``v[p+1] -> v[p+2]``; the entry is +1 when that agrees with
    the canonical low -> high orientation of the edge.
    """
    tris = mesh.triangles
    start = tris[:, [1, 2, 0]]
    end = tris[:, [2, 0, 1]]
    signs = np.where(start < end, 1, -1).astype(np.int64)
    cols = np.repeat(np.arange(mesh.n_triangles), 3)
    return _finalize(
        sp.coo_matrix(
            (signs.ravel(), (mesh.triangle_edges.ravel(), cols)),
            shape=(mesh.n_edges, mesh.n_triangles),
        )
    )


def boundary_1(mesh):
    """Edge -> vertex incidence, shape (N0, N1): -1 at the tail, +1 at the head."""
    e = mesh.edges
    rows = np.column_stack([e[:, 0], e[:, 1]]).ravel()
    cols = np.repeat(np.arange(mesh.n_edges), 2)
    vals = np.tile(np.array([-1, 1], dtype=np.int64), mesh.n_edges)
    return _finalize(sp.coo_matrix((vals, (rows, cols)), shape=(mesh.n_vertices, mesh.n_edges)))


def derivative_0(mesh):
    """Primal exterior derivative on 0-cochains, ``boundary_1.T`` (N1 x N0)."""
    return _finalize(boundary_1(mesh).T)


def derivative_1(mesh):
    """Primal exterior derivative on 1-cochains, ``boundary_2.T`` (N2 x N1)."""
    return _finalize(boundary_2(mesh).T)


def dual_derivative_1(mesh):
    """Dual derivative from dual 1-cochains to dual 2-cochains, ``-derivative_0.T`` (N0 x N1)."""
    return _finalize(-derivative_0(mesh).T)


def hodge_star_0(mesh, dual):
    """Diagonal map from primal 0-cochains to dual 2-cochains: box areas."""
    n = mesh.n_vertices
    return _finalize(sp.diags(np.asarray(dual.box_areas, dtype=float), 0, shape=(n, n)))


def hodge_star_1(mesh, dual):
    """Diagonal map from primal 1-cochains to dual 1-cochains.

    Entry ``e`` is the signed dual-to-primal length ratio of edge ``e``,
    summed over its adjacent triangles. Obtuse neighbours make it smaller
    and possibly negative; right angles contribute zero.
    """
    n = mesh.n_edges
    return _finalize(sp.diags(np.asarray(dual.edge_ratios, dtype=float), 0, shape=(n, n)))


def diagonal_inverse(op):
    """Inverse of a diagonal operator; zero entries stay zero (pseudo-inverse)."""
    d = op.diagonal()
    inv = np.zeros_like(d, dtype=float)
    nz = d != 0
    inv[nz] = 1.0 / d[nz]
    return _finalize(sp.diags(inv, 0, shape=op.shape))


@dataclass(frozen=True)
class Cochain:
    """Real values on primal k-simplices or dual cells.

    A dual k-cochain has one value per primal (2-k)-simplex.
    """

    degree: int
    complex: str
    values: np.ndarray

    def __post_init__(self):
        if self.degree not in (0, 1, 2):
            raise ValueError(f"degree must be 0, 1 or 2, got {self.degree}")
        if self.complex not in (PRIMAL, DUAL):
            raise ValueError(f"complex must be 'primal' or 'dual', got {self.complex!r}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @classmethod
    def on(cls, mesh, degree, values, complex=PRIMAL):
        c = cls(degree, complex, values)
        c.check(mesh)
        return c

    def check(self, mesh):
        k = self.degree if self.complex == PRIMAL else 2 - self.degree
        n = mesh.counts[k]
        if self.values.shape != (n,):
            raise DimensionMismatch(
                f"{self.complex} {self.degree}-cochain needs {n} values, got {self.values.shape}"
            )


@dataclass(frozen=True)
class Chain:
    """Integer combination of oriented k-simplices (or dual cells)."""

    degree: int
    complex: str
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients)
        if coeffs.dtype.kind not in "iu":
            if not np.all(np.equal(np.mod(coeffs, 1), 0)):
                raise ValueError("chain coefficients must be integers")
            coeffs = coeffs.astype(np.int64)
        object.__setattr__(self, "coefficients", coeffs)


def evaluate(cochain, chain):
    """Pairing ``<omega, c> = sum_j alpha_j omega(sigma_j)``."""
    if isinstance(chain, Chain):
        if (chain.degree, chain.complex) != (cochain.degree, cochain.complex):
            raise DimensionMismatch(
                f"cannot pair a {cochain.complex} {cochain.degree}-cochain with a "
                f"{chain.complex} {chain.degree}-chain"
            )
        coeffs = chain.coefficients
    else:
        coeffs = np.asarray(chain)
    if coeffs.shape != cochain.values.shape:
        raise DimensionMismatch(
            f"chain has {coeffs.shape} coefficients, cochain has {cochain.values.shape} values"
        )
    return float(np.dot(cochain.values, coeffs))


def apply(op, cochain, degree, complex=None):
    """Apply a sparse operator to a cochain and tag the result."""
    if op.shape[1] != cochain.values.shape[0]:
        raise DimensionMismatch(f"operator {op.shape} cannot act on {cochain.values.shape[0]} values")
    return Cochain(degree, complex or cochain.complex, op @ cochain.values)


def to_triplets(op):
    """Coordinate-triplet text: header ``rows cols nnz`` then ``row col value`` lines."""
    c = sp.coo_matrix(op)
    order = np.lexsort((c.col, c.row))
    lines = [f"{op.shape[0]} {op.shape[1]} {c.nnz}"]
    integer = c.dtype.kind in "iu"
    for k in order:
        v = int(c.data[k]) if integer else repr(float(c.data[k]))
        lines.append(f"{c.row[k]} {c.col[k]} {v}")
    return "\n".join(lines) + "\n"


def from_triplets(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    rows, cols, nnz = (int(x) for x in lines[0].split())
    r, c, v = [], [], []
    for ln in lines[1:nnz + 1]:
        a, b, val = ln.split()
        r.append(int(a))
        c.append(int(b))
        v.append(float(val))
    return _finalize(sp.coo_matrix((v, (r, c)), shape=(rows, cols)))
