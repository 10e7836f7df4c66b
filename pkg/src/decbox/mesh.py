"""Oriented 2D simplicial complexes: construction, validation, generators and I/O."""

import json
from collections import defaultdict
from pathlib import Path

import numpy as np

from .errors import (
    DanglingVertex,
    MeshError,
    DegenerateTriangle,
    DuplicateTriangle,
    InconsistentOrientation,
    NonManifoldEdge,
    NonManifoldVertex,
    ParseError,
    PerturbationFailed,
)

# relative threshold on twice the signed area, scaled by the squared longest edge
DEGENERACY_TOL = 1e-14


def twice_signed_area(p0, p1, p2):
    """Cross product (p1 - p0) x (p2 - p0); works on single points or stacked arrays."""
    p0, p1, p2 = np.asarray(p0, float), np.asarray(p1, float), np.asarray(p2, float)
    a = p1 - p0
    b = p2 - p0
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class TriangleMesh:
    """Immutable oriented triangle mesh in the plane.

    Use :func:`build_mesh` rather than calling the constructor directly; the
    constructor trusts its inputs.

    Attributes
    ----------
    points : (N0, 2) float array
    triangles : (N2, 3) int array
        Vertex triples, counterclockwise unless the mesh was built with
        ``allow_inverted=True``.
    edges : (N1, 2) int array
        Canonical edges ``(a, b)`` with ``a < b``, sorted lexicographically.
    triangle_edges : (N2, 3) int array
        ``triangle_edges[t, p]`` is the edge opposite local vertex ``p``.
    edge_triangles : (N1, 2) int array
        Adjacent triangles of each edge, ``-1`` in the second slot for
        boundary edges.
    boundary_edges, boundary_vertices : bool arrays
    flipped : (N2,) bool array
        Input triples that were reversed to make them counterclockwise.
    """

    def __init__(self, points, triangles, edges, triangle_edges, edge_triangles, flipped):
        self.points = _frozen(np.asarray(points, dtype=float))
        self.triangles = _frozen(np.asarray(triangles, dtype=np.int64))
        self.edges = _frozen(np.asarray(edges, dtype=np.int64))
        self.triangle_edges = _frozen(np.asarray(triangle_edges, dtype=np.int64))
        self.edge_triangles = _frozen(np.asarray(edge_triangles, dtype=np.int64))
        self.flipped = _frozen(np.asarray(flipped, dtype=bool))
        self.boundary_edges = _frozen(self.edge_triangles[:, 1] < 0)
        bv = np.zeros(len(self.points), dtype=bool)
        bv[self.edges[self.boundary_edges].ravel()] = True
        self.boundary_vertices = _frozen(bv)
        self._stars = None

    @property
    def n_vertices(self):
        return len(self.points)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def counts(self):
        return self.n_vertices, self.n_edges, self.n_triangles

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_triangles

    @property
    def interior_vertices(self):
        return np.flatnonzero(~self.boundary_vertices)

    @property
    def signed_areas(self):
        p = self.points[self.triangles]
        return 0.5 * twice_signed_area(p[:, 0], p[:, 1], p[:, 2])

    @property
    def areas(self):
        return np.abs(self.signed_areas)

    @property
    def edge_lengths(self):
        d = self.points[self.edges[:, 1]] - self.points[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def vertex_stars(self):
        """Triangle ids around every vertex, in counterclockwise fan order."""
        if self._stars is None:
            self._stars = _fan_orders(self.triangles, self.n_vertices)
        return self._stars

    def edge_id(self, a, b):
        """Index of the edge joining vertices ``a`` and ``b`` (either order)."""
        a, b = min(a, b), max(a, b)
        i = np.searchsorted(self.edges[:, 0], a, side="left")
        j = np.searchsorted(self.edges[:, 0], a, side="right")
        k = i + np.searchsorted(self.edges[i:j, 1], b)
        if k < j and self.edges[k, 1] == b:
            return int(k)
        raise KeyError((a, b))

    def canonical(self):
        """``(points, triangles)`` as plain arrays; feeding them back to
        :func:`build_mesh` reproduces this mesh."""
        return np.array(self.points), np.array(self.triangles)

    def __eq__(self, other):
        if not isinstance(other, TriangleMesh):
            return NotImplemented
        return (
            self.points.shape == other.points.shape
            and np.array_equal(self.triangles, other.triangles)
            and np.allclose(self.points, other.points, rtol=0.0, atol=1e-15)
        )

    __hash__ = None

    def __repr__(self):
        n0, n1, n2 = self.counts
        return f"TriangleMesh(N0={n0}, N1={n1}, N2={n2})"


def _fan_orders(triangles, n_vertices):
    # around vertex v a CCW triangle (v, a, b) hands over to the triangle containing (v, b, .)
    succ = [dict() for _ in range(n_vertices)]
    for t, tri in enumerate(triangles):
        for p in range(3):
            v, a, b = tri[p], tri[(p + 1) % 3], tri[(p + 2) % 3]
            succ[v][a] = (b, t)
    stars = []
    for v in range(n_vertices):
        links = succ[v]
        ends = set(links) - {b for b, _ in links.values()}
        start = min(ends) if ends else min(links, default=None)
        order = []
        a = start
        while a is not None and a in links and len(order) < len(links):
            b, t = links[a]
            order.append(t)
            a = b
        stars.append(tuple(order))
    return stars


def build_mesh(vertices, triangles, *, allow_inverted=False):
    """Build and validate an oriented triangle mesh.

    Clockwise triples are reversed (and recorded in ``mesh.flipped``).
    Edges and their incidences are derived as faces of the triangles.

    ``allow_inverted`` keeps triples exactly as given, so negatively oriented
    triangles are retained; it exists for circumcentric subdivisions of
    obtuse triangles where the combinatorial orientation is what matters.

    Raises
    ------
    NonManifoldEdge, NonManifoldVertex, InconsistentOrientation,
    DegenerateTriangle, DuplicateTriangle, DanglingVertex, MeshError
    """
    pts = np.array(vertices, dtype=float)
    tris = np.array(triangles, dtype=np.int64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise MeshError(f"vertices must have shape (n, 2), got {pts.shape}")
    if tris.ndim != 2 or tris.shape[1] != 3:
        raise MeshError(f"triangles must have shape (m, 3), got {tris.shape}")
    if len(pts) < 3 or len(tris) < 1:
        raise MeshError("need at least 3 vertices and 1 triangle")
    if not np.all(np.isfinite(pts)):
        raise MeshError("vertex coordinates must be finite")
    if tris.min() < 0 or tris.max() >= len(pts):
        raise MeshError("triangle vertex index out of range")
    if np.any(tris[:, 0] == tris[:, 1]) or np.any(tris[:, 1] == tris[:, 2]) or np.any(
        tris[:, 0] == tris[:, 2]
    ):
        bad = int(np.flatnonzero((tris[:, 0] == tris[:, 1]) | (tris[:, 1] == tris[:, 2])
                                 | (tris[:, 0] == tris[:, 2]))[0])
        raise DegenerateTriangle(f"triangle {bad} repeats a vertex: {tris[bad].tolist()}")

    p = pts[tris]
    det = twice_signed_area(p[:, 0], p[:, 1], p[:, 2])
    sq = np.stack([np.sum((p[:, (k + 1) % 3] - p[:, k]) ** 2, axis=1) for k in range(3)], axis=1)
    degenerate = np.abs(det) < DEGENERACY_TOL * sq.max(axis=1)
    if np.any(degenerate):
        bad = int(np.flatnonzero(degenerate)[0])
        raise DegenerateTriangle(f"triangle {bad} {tris[bad].tolist()} has zero area")

    flipped = np.zeros(len(tris), dtype=bool) if allow_inverted else det < 0
    tris[flipped] = tris[flipped][:, [0, 2, 1]]

    key = np.sort(tris, axis=1)
    _, first, counts = np.unique(key, axis=0, return_index=True, return_counts=True)
    if np.any(counts > 1):
        dup = key[first[np.argmax(counts > 1)]]
        raise DuplicateTriangle(f"triangle {dup.tolist()} appears more than once")

    used = np.zeros(len(pts), dtype=bool)
    used[tris.ravel()] = True
    if not used.all():
        raise DanglingVertex(f"vertex {int(np.flatnonzero(~used)[0])} belongs to no triangle")

    # edge p of a triangle is opposite local vertex p, traversed v[p+1] -> v[p+2]
    directed = np.stack([tris[:, [1, 2]], tris[:, [2, 0]], tris[:, [0, 1]]], axis=1)
    flat = directed.reshape(-1, 2)
    undirected = np.sort(flat, axis=1)
    edges, inverse, counts = np.unique(undirected, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    if np.any(counts > 2):
        e = edges[np.argmax(counts > 2)]
        raise NonManifoldEdge(f"edge {e.tolist()} belongs to {counts.max()} triangles")

    triangle_edges = inverse.reshape(-1, 3)
    edge_triangles = -np.ones((len(edges), 2), dtype=np.int64)
    edge_dir = np.zeros((len(edges), 2), dtype=np.int64)
    owner = np.repeat(np.arange(len(tris)), 3)
    fill = np.zeros(len(edges), dtype=np.int64)
    for k, e in enumerate(inverse):
        edge_triangles[e, fill[e]] = owner[k]
        edge_dir[e, fill[e]] = flat[k, 0]
        fill[e] += 1
    interior = counts == 2
    same = interior & (edge_dir[:, 0] == edge_dir[:, 1])
    if np.any(same):
        e = int(np.argmax(same))
        raise InconsistentOrientation(
            f"triangles {edge_triangles[e].tolist()} induce the same orientation "
            f"on shared edge {edges[e].tolist()}"
        )

    mesh = TriangleMesh(pts, tris, edges, triangle_edges, edge_triangles, flipped)
    _check_fans(mesh)
    return mesh


def _check_fans(mesh):
    # every vertex link must be a single path (boundary) or a single cycle (interior)
    link_degree = [defaultdict(int) for _ in range(mesh.n_vertices)]
    for tri in mesh.triangles:
        for p in range(3):
            v, a, b = tri[p], tri[(p + 1) % 3], tri[(p + 2) % 3]
            link_degree[v][a] += 1
            link_degree[v][b] += 1
    incident = np.bincount(mesh.triangles.ravel(), minlength=mesh.n_vertices)
    stars = mesh.vertex_stars
    for v in range(mesh.n_vertices):
        if len(stars[v]) != incident[v] or any(d > 2 for d in link_degree[v].values()):
            raise NonManifoldVertex(f"triangles around vertex {v} do not form a single fan")


def vertex_star(mesh, i):
    """Triangle ids having vertex ``i`` as a corner, in counterclockwise fan order."""
    if not 0 <= i < mesh.n_vertices:
        raise IndexError(f"vertex {i} out of range")
    return mesh.vertex_stars[i]


def _square_grid(n):
    g = np.linspace(0.0, 1.0, n + 1)
    y, x = np.meshgrid(g, g, indexing="ij")
    return np.column_stack([x.ravel(), y.ravel()])


def generate_square_mesh(n, pattern="diagonal"):
    """Structured triangulation of the unit square with ``n`` cells per side.

    ``diagonal`` splits each cell along its (+1, +1) diagonal (2n^2 triangles);
    ``crisscross`` adds the cell center and splits into 4 (4n^2 triangles).
    Vertices are the row-major grid followed by the cell centers.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    pts = _square_grid(n)
    row = n + 1
    tris = []
    if pattern == "diagonal":
        for j in range(n):
            for i in range(n):
                a = j * row + i
                b, c, d = a + 1, a + row + 1, a + row
                tris.append((a, b, c))
                tris.append((a, c, d))
    elif pattern == "crisscross":
        centers = []
        for j in range(n):
            for i in range(n):
                centers.append(((i + 0.5) / n, (j + 0.5) / n))
                m = len(pts) + len(centers) - 1
                a = j * row + i
                b, c, d = a + 1, a + row + 1, a + row
                tris.extend([(a, b, m), (b, c, m), (c, d, m), (d, a, m)])
        pts = np.vstack([pts, centers])
    else:
        raise ValueError(f"unknown pattern {pattern!r}")
    return build_mesh(pts, tris)


def generate_perturbed_mesh(n, amplitude, seed, pattern="diagonal", max_retries=100):
    """Square mesh with interior vertices jittered by at most ``amplitude * h`` per axis.

    Boundary vertices stay put. Offsets come from ``numpy.random.default_rng(seed)``;
    vertices whose move would invert a triangle are redrawn.
    """
    if not 0.0 <= amplitude < 0.49:
        raise ValueError(f"amplitude must lie in [0, 0.49), got {amplitude}")
    base = generate_square_mesh(n, pattern)
    if amplitude == 0.0:
        return base
    h = 1.0 / n
    rng = np.random.default_rng(seed)
    pts = np.array(base.points)
    tris = base.triangles
    interior = base.interior_vertices
    pts[interior] += rng.uniform(-amplitude * h, amplitude * h, size=(len(interior), 2))

    for _ in range(max_retries):
        p = pts[tris]
        det = twice_signed_area(p[:, 0], p[:, 1], p[:, 2])
        bad = det <= DEGENERACY_TOL * h * h
        if not bad.any():
            return build_mesh(pts, tris)
        movers = np.intersect1d(np.unique(tris[bad]), interior)
        pts[movers] = base.points[movers] + rng.uniform(
            -amplitude * h, amplitude * h, size=(len(movers), 2)
        )
    raise PerturbationFailed(
        f"could not place vertices without inversion after {max_retries} retries"
    )


def save_mesh(mesh, path):
    data = {"vertices": mesh.points.tolist(), "triangles": mesh.triangles.tolist()}
    Path(path).write_text(json.dumps(data, indent=1) + "\n")


def _parse_mesh_document(text, source):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be an object")
    for key in ("vertices", "triangles"):
        if key not in data or not isinstance(data[key], list):
            raise ParseError(f"{source}: missing array {key!r}")
    verts = []
    for i, v in enumerate(data["vertices"]):
        if (not isinstance(v, list) or len(v) != 2
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
            raise ParseError(f"{source}: vertices[{i}] must be [x, y], got {v!r}")
        verts.append(v)
    n = len(verts)
    tris = []
    for i, t in enumerate(data["triangles"]):
        if not isinstance(t, list) or len(t) != 3:
            raise ParseError(f"{source}: triangles[{i}] must be [i, j, k], got {t!r}")
        for j, idx in enumerate(t):
            if not isinstance(idx, int) or isinstance(idx, bool):
                raise ParseError(f"{source}: triangles[{i}][{j}] is not an integer: {idx!r}")
            if not 0 <= idx < n:
                raise ParseError(
                    f"{source}: triangles[{i}][{j}] = {idx} out of range for {n} vertices"
                )
        tris.append(t)
    return verts, tris


def _data_lines(path):
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _load_triangle_format(node_path, ele_path):
    lines = list(_data_lines(node_path))
    if not lines:
        raise ParseError(f"{node_path}: empty file")
    lineno, header = lines[0]
    try:
        count = int(header[0])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{node_path}:{lineno}: bad header") from exc
    ids, verts = [], []
    for lineno, fields in lines[1:count + 1]:
        try:
            ids.append(int(fields[0]))
            verts.append([float(fields[1]), float(fields[2])])
        except (ValueError, IndexError) as exc:
            raise ParseError(f"{node_path}:{lineno}: expected 'id x y'") from exc
    if len(verts) != count:
        raise ParseError(f"{node_path}: header announces {count} nodes, found {len(verts)}")
    base = ids[0] if ids else 1
    tris = []
    elines = list(_data_lines(ele_path))
    if not elines:
        raise ParseError(f"{ele_path}: empty file")
    for lineno, fields in elines[1:]:
        try:
            t = [int(f) - base for f in fields[1:4]]
        except ValueError as exc:
            raise ParseError(f"{ele_path}:{lineno}: expected integer node ids") from exc
        if len(t) != 3:
            raise ParseError(f"{ele_path}:{lineno}: expected 3 node ids")
        for j, idx in enumerate(t):
            if not 0 <= idx < count:
                raise ParseError(f"{ele_path}:{lineno}: field {j + 2} node {idx + base} out of range")
        tris.append(t)
    return verts, tris


def load_mesh(path):
    """Read a mesh from a JSON document, or a Triangle ``.node``/``.ele`` pair.

    For Triangle files pass either path; the sibling file is located by suffix.
    """
    path = Path(path)
    if path.suffix in (".node", ".ele"):
        verts, tris = _load_triangle_format(path.with_suffix(".node"), path.with_suffix(".ele"))
    else:
        verts, tris = _parse_mesh_document(path.read_text(), str(path))
    return build_mesh(verts, tris)
