"""Circumcentric dual complex: circumcenters, signed dual edges, boxes."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSubdivisionSimplex, DegenerateTriangle
from .mesh import DEGENERACY_TOL, build_mesh, twice_signed_area

# signed ratios closer to zero than this are treated as right angles
ZERO_RATIO_TOL = 1e-12


def _circumcenters(p0, p1, p2):
    a = p1 - p0
    b = p2 - p0
    d = 2.0 * (a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])
    longest = np.max(
        np.stack([np.sum(a * a, -1), np.sum(b * b, -1), np.sum((p2 - p1) ** 2, -1)]), axis=0
    )
    if np.any(np.abs(d) < 2.0 * DEGENERACY_TOL * longest):
        raise DegenerateTriangle("circumcenter of a degenerate triangle")
    aa = np.sum(a * a, -1)
    bb = np.sum(b * b, -1)
    cx = (b[..., 1] * aa - a[..., 1] * bb) / d
    cy = (a[..., 0] * bb - b[..., 0] * aa) / d
    return p0 + np.stack([cx, cy], axis=-1)


def circumcenter(p0, p1, p2):
    """Point equidistant from the three corners of a non-degenerate triangle."""
    return _circumcenters(*(np.asarray(p, dtype=float) for p in (p0, p1, p2)))


def _det3_rows(r0, r1, r2):
    # det [[x0 y0 1], [x1 y1 1], [x2 y2 1]]
    return twice_signed_area(r0, r1, r2)


def signed_ratios_from_points(corners, centers):
    """Signed dual/primal length ratios ``e_p / l_p`` for stacked triangles.

    ``corners`` has shape (..., 3, 2) and must be counterclockwise; ``centers``
    has shape (..., 2). Ratio ``p`` belongs to the edge opposite corner ``p``
    and is the 3x3 determinant with rows (corner p+1, center, corner p+2)
    divided by ``l_p^2``, negated so that an interior center gives a positive
    value for counterclockwise storage. A center beyond edge ``p`` (obtuse
    angle at corner ``p``) makes the ratio negative.
    """
    out = []
    for p in range(3):
        pj = corners[..., (p + 1) % 3, :]
        pk = corners[..., (p + 2) % 3, :]
        det = _det3_rows(pj, centers, pk)
        out.append(-det / np.sum((pk - pj) ** 2, axis=-1))
    return np.stack(out, axis=-1)


@dataclass(frozen=True, eq=False)
class DualComplex:
    """Circumcentric dual of a :class:`~decbox.mesh.TriangleMesh`.

    Per-triangle arrays are indexed ``[t, p]`` with ``p`` the local corner;
    the dual segment ``p`` joins the circumcenter to the midpoint of the edge
    opposite corner ``p``. The kite ``p`` is the part of the triangle's box
    partition attached to corner ``p``.
    """

    circumcenters: np.ndarray
    midpoints: np.ndarray
    dual_ratios: np.ndarray
    dual_lengths: np.ndarray
    edge_ratios: np.ndarray
    kite_areas: np.ndarray
    box_areas: np.ndarray
    well_centered: np.ndarray = field(repr=False)


def signed_dual_ratios(t, mesh, dual=None):
    """Signed ``(e0/l0, e1/l1, e2/l2)`` of triangle ``t``."""
    corners = mesh.points[mesh.triangles[t]]
    c = circumcenter(*corners) if dual is None else dual.circumcenters[t]
    return tuple(float(r) for r in signed_ratios_from_points(corners, c))


def _kite_areas(corners, centers):
    # shoelace over (x_p, m toward x_{p+1}, C, m toward x_{p+2})
    kites = []
    for p in range(3):
        x = corners[:, p]
        ma = 0.5 * (x + corners[:, (p + 1) % 3])
        mb = 0.5 * (x + corners[:, (p + 2) % 3])
        ring = (x, ma, centers, mb)
        s = 0.0
        for q in range(4):
            a, b = ring[q], ring[(q + 1) % 4]
            s = s + a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        kites.append(0.5 * s)
    return np.stack(kites, axis=1)


def build_dual(mesh):
    """Construct the circumcentric dual of ``mesh`` (obtuse triangles allowed)."""
    corners = mesh.points[mesh.triangles]
    centers = _circumcenters(corners[:, 0], corners[:, 1], corners[:, 2])
    midpoints = 0.5 * (mesh.points[mesh.edges[:, 0]] + mesh.points[mesh.edges[:, 1]])
    ratios = signed_ratios_from_points(corners, centers)
    lengths = mesh.edge_lengths[mesh.triangle_edges]
    edge_ratios = np.zeros(mesh.n_edges)
    np.add.at(edge_ratios, mesh.triangle_edges.ravel(), ratios.ravel())
    kites = _kite_areas(corners, centers)
    boxes = np.zeros(mesh.n_vertices)
    # sequential accumulation in triangle order keeps the sums reproducible
    np.add.at(boxes, mesh.triangles.ravel(), kites.ravel())
    arrays = dict(
        circumcenters=centers,
        midpoints=midpoints,
        dual_ratios=ratios,
        dual_lengths=ratios * lengths,
        edge_ratios=edge_ratios,
        kite_areas=kites,
        box_areas=boxes,
        well_centered=np.all(ratios > ZERO_RATIO_TOL, axis=1),
    )
    for a in arrays.values():
        a.setflags(write=False)
    return DualComplex(**arrays)


def box_areas(mesh, dual=None):
    """Per-vertex box areas ``|b_i|`` (signed kites summed over the vertex star)."""
    return (build_dual(mesh) if dual is None else dual).box_areas


@dataclass
class WellCenteredReport:
    n_triangles: int
    n_offenders: int
    offenders: list
    n_negative: int
    n_zero: int
    min_ratio: float

    @property
    def well_centered(self):
        return self.n_offenders == 0

    def lines(self):
        yield f"triangles: {self.n_triangles}"
        yield f"not well-centered: {self.n_offenders}"
        yield f"  with a negative ratio (obtuse): {self.n_negative}"
        yield f"  with a zero ratio (right angle): {self.n_zero}"
        yield f"min signed ratio: {self.min_ratio:.6g}"


def well_centered_report(mesh, dual=None, zero_tol=ZERO_RATIO_TOL):
    """Flag triangles whose circumcenter is not strictly inside.

    A ratio with magnitude below ``zero_tol`` counts as zero (right angle).
    """
    dual = build_dual(mesh) if dual is None else dual
    r = dual.dual_ratios
    nonpos = r <= zero_tol
    offenders = np.flatnonzero(nonpos.any(axis=1))
    negative = (r < -zero_tol).any(axis=1)
    return WellCenteredReport(
        n_triangles=mesh.n_triangles,
        n_offenders=len(offenders),
        offenders=offenders.tolist(),
        n_negative=int(negative.sum()),
        n_zero=int((nonpos.any(axis=1) & ~negative).sum()),
        min_ratio=float(r.min()) + 0.0,  # no "-0" in reports
    )


def circumcentric_subdivision(mesh, dual=None):
    """Barycentric-style refinement through midpoints and circumcenters.

    Vertices are the original vertices, then the edge midpoints (edge order),
    then the circumcenters (triangle order). Each triangle yields six
    subdivision triangles ``(x_p, m, C)`` oriented like their parent, so in
    obtuse triangles some of them are negatively oriented.
    """
    dual = build_dual(mesh) if dual is None else dual
    n0, n1 = mesh.n_vertices, mesh.n_edges
    points = np.vstack([mesh.points, dual.midpoints, dual.circumcenters])
    tris = []
    for t, tri in enumerate(mesh.triangles):
        c = n0 + n1 + t
        for p in range(3):
            toward_next = n0 + mesh.triangle_edges[t, (p + 2) % 3]
            toward_prev = n0 + mesh.triangle_edges[t, (p + 1) % 3]
            tris.append((tri[p], toward_next, c))
            tris.append((tri[p], c, toward_prev))
    tris = np.array(tris, dtype=np.int64)
    p = points[tris]
    det = twice_signed_area(p[:, 0], p[:, 1], p[:, 2])
    scale = np.repeat(mesh.edge_lengths[mesh.triangle_edges].max(axis=1) ** 2, 6)
    bad = np.abs(det) < DEGENERACY_TOL * scale
    if np.any(bad):
        t = int(np.flatnonzero(bad)[0]) // 6
        raise DegenerateSubdivisionSimplex(
            f"circumcenter of triangle {t} coincides with an edge midpoint"
        )
    return build_mesh(points, tris, allow_inverted=True)


def dual_table(mesh, dual):
    """Plain-text dump of the dual complex."""
    out = ["# triangle  cx  cy  ratio0  ratio1  ratio2  well_centered"]
    for t in range(mesh.n_triangles):
        c = dual.circumcenters[t]
        r = dual.dual_ratios[t]
        out.append(
            f"{t} {c[0]!r} {c[1]!r} {r[0]!r} {r[1]!r} {r[2]!r} {int(dual.well_centered[t])}"
        )
    out.append("# edge  mx  my  hodge1")
    for e in range(mesh.n_edges):
        m = dual.midpoints[e]
        out.append(f"{e} {m[0]!r} {m[1]!r} {dual.edge_ratios[e]!r}")
    out.append("# vertex  box_area")
    for v in range(mesh.n_vertices):
        out.append(f"{v} {dual.box_areas[v]!r}")
    return "\n".join(out) + "\n"
