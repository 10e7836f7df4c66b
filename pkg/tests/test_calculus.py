import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from decbox import calculus as C
from decbox.dual import build_dual
from decbox.errors import DimensionMismatch
from decbox.mesh import build_mesh, generate_perturbed_mesh, generate_square_mesh

SQRT3 = math.sqrt(3.0)


def test_boundary_2_single_triangle(single_triangle):
    b2 = C.boundary_2(single_triangle)
    assert single_triangle.edges.tolist() == [[0, 1], [0, 2], [1, 2]]
    assert b2.toarray().ravel().tolist() == [1, -1, 1]


def test_boundary_2_alternating_formula(fleet_mesh):
    # column t = [v1, v2] - [v0, v2] + [v0, v1], with [a, b] = -[b, a]
    m = fleet_mesh
    dense = C.boundary_2(m).toarray()
    for t, (v0, v1, v2) in enumerate(m.triangles):
        expect = np.zeros(m.n_edges, dtype=int)
        for (a, b), sign in (((v1, v2), 1), ((v0, v2), -1), ((v0, v1), 1)):
            e = m.edge_id(a, b)
            expect[e] += sign if a < b else -sign
        assert np.array_equal(dense[:, t], expect)


def test_boundary_2_shared_edge_opposite(two_square):
    b2 = C.boundary_2(two_square).toarray()
    diag = two_square.edge_id(0, 2)
    assert b2[diag, 0] == -b2[diag, 1] != 0


def test_boundary_1_columns(fleet_mesh):
    b1 = C.boundary_1(fleet_mesh)
    dense = b1.toarray()
    for e, (a, b) in enumerate(fleet_mesh.edges):
        assert dense[a, e] == -1 and dense[b, e] == 1
    assert np.all(np.count_nonzero(dense, axis=0) == 2)
    assert np.all(dense.sum(axis=0) == 0)


def test_boundary_of_boundary_is_zero(fleet_mesh):
    b1, b2 = C.boundary_1(fleet_mesh), C.boundary_2(fleet_mesh)
    assert b1.dtype.kind == "i" and b2.dtype.kind == "i"
    assert (b1 @ b2).count_nonzero() == 0


def test_derivatives(fleet_mesh):
    m = fleet_mesh
    d0, d1 = C.derivative_0(m), C.derivative_1(m)
    assert d0.shape == (m.n_edges, m.n_vertices)
    assert d1.shape == (m.n_triangles, m.n_edges)
    assert (d1 @ d0).count_nonzero() == 0
    assert (d0 - C.boundary_1(m).T).count_nonzero() == 0
    u = np.random.default_rng(0).normal(size=m.n_vertices)
    du = d0 @ u
    assert np.allclose(du, u[m.edges[:, 1]] - u[m.edges[:, 0]], rtol=0, atol=0)
    assert np.all(d0 @ np.full(m.n_vertices, 3.7) == 0)


def test_dual_derivative(fleet_mesh):
    m = fleet_mesh
    dd1 = C.dual_derivative_1(m)
    d0 = C.derivative_0(m)
    assert dd1.shape == (m.n_vertices, m.n_edges)
    assert (dd1 + d0.T).count_nonzero() == 0
    dense = dd1.toarray()
    for i in range(m.n_vertices):
        incident = np.flatnonzero((m.edges == i).any(axis=1))
        assert set(np.flatnonzero(dense[i])) == set(incident)
        assert np.all(np.abs(dense[i, incident]) == 1)
        assert np.array_equal(dense[i], -d0.toarray()[:, i])


def test_hodge_star_1_equilateral(equilateral):
    s1 = C.hodge_star_1(equilateral, build_dual(equilateral))
    assert np.allclose(s1.diagonal(), SQRT3 / 6, atol=1e-15)
    assert s1.nnz == 3


def test_hodge_star_1_two_equilateral():
    m = build_mesh([(0, 0), (1, 0), (0.5, SQRT3 / 2), (0.5, -SQRT3 / 2)], [(0, 1, 2), (0, 3, 1)])
    s1 = C.hodge_star_1(m, build_dual(m)).diagonal()
    assert s1[m.edge_id(0, 1)] == pytest.approx(1 / SQRT3, abs=1e-15)
    assert s1[m.edge_id(0, 2)] == pytest.approx(SQRT3 / 6, abs=1e-15)


def test_hodge_star_1_diagonal_pattern_hypotenuse():
    m = generate_square_mesh(4, "diagonal")
    s1 = C.hodge_star_1(m, build_dual(m)).diagonal()
    d = m.points[m.edges[:, 1]] - m.points[m.edges[:, 0]]
    hyp = (np.abs(d[:, 0]) > 0) & (np.abs(d[:, 1]) > 0)
    assert hyp.sum() == 16
    assert np.all(np.abs(s1[hyp]) <= 1e-15)
    assert np.all(s1[~hyp] > 0)


def test_hodge_star_0():
    m = generate_square_mesh(1, "crisscross")
    s0 = C.hodge_star_0(m, build_dual(m))
    assert s0.diagonal()[4] == pytest.approx(0.5)
    for n in (3, 5):
        mm = generate_square_mesh(n, "crisscross")
        assert abs(C.hodge_star_0(mm, build_dual(mm)).diagonal().sum() - 1) <= 1e-12


def test_hodge_star_0_equilateral(equilateral):
    s0 = C.hodge_star_0(equilateral, build_dual(equilateral))
    assert np.allclose(s0.diagonal(), SQRT3 / 12, atol=1e-15)


def test_star_inverse_on_well_centered(acute_patch):
    d = build_dual(acute_patch)
    for star in (C.hodge_star_0(acute_patch, d), C.hodge_star_1(acute_patch, d)):
        assert np.all(star.diagonal() != 0)
        ident = C.diagonal_inverse(star) @ star
        assert np.allclose(ident.toarray(), np.eye(star.shape[0]), rtol=0, atol=1e-14)


def test_operators_have_no_explicit_zeros():
    m = generate_square_mesh(3, "diagonal")
    d = build_dual(m)
    for op in (C.boundary_1(m), C.boundary_2(m), C.hodge_star_1(m, d)):
        assert np.all(op.data != 0)


def test_evaluate_basics(two_square):
    w = C.Cochain.on(two_square, 1, [1.0, 2.0, 3.0, 4.0, 5.0])
    e = np.zeros(5, dtype=int)
    e[3] = 1
    assert C.evaluate(w, C.Chain(1, "primal", e)) == 4.0
    assert C.evaluate(w, e) == 4.0


def test_evaluate_dimension_checks(two_square):
    w = C.Cochain(1, "primal", np.ones(5))
    with pytest.raises(DimensionMismatch):
        C.evaluate(w, np.ones(4, dtype=int))
    with pytest.raises(DimensionMismatch):
        C.evaluate(w, C.Chain(0, "primal", np.ones(5, dtype=int)))
    with pytest.raises(DimensionMismatch):
        C.Cochain.on(two_square, 0, np.ones(5))
    # dual 2-cochains live on primal vertices
    C.Cochain.on(two_square, 2, np.ones(4), complex="dual")
    with pytest.raises(ValueError):
        C.Chain(1, "primal", [0.5, 1.0])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pairing_is_bilinear(seed):
    rng = np.random.default_rng(seed)
    n = 9
    w1, w2 = rng.normal(size=n), rng.normal(size=n)
    c1, c2 = rng.integers(-5, 6, n), rng.integers(-5, 6, n)
    a, b = rng.normal(), int(rng.integers(-3, 4))
    ev = lambda w, c: C.evaluate(C.Cochain(1, "primal", w), C.Chain(1, "primal", c))
    assert ev(a * w1 + w2, c1) == pytest.approx(a * ev(w1, c1) + ev(w2, c1), abs=1e-12)
    assert ev(w1, b * c1 + c2) == pytest.approx(b * ev(w1, c1) + ev(w1, c2), abs=1e-12)


STOKES_MESH = generate_perturbed_mesh(5, 0.35, 4)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_discrete_stokes(seed):
    m = STOKES_MESH
    rng = np.random.default_rng(seed)
    u = C.Cochain(0, "primal", rng.normal(size=m.n_vertices))
    c1 = C.Chain(1, "primal", rng.integers(-3, 4, m.n_edges))
    du = C.apply(C.derivative_0(m), u, 1)
    assert C.evaluate(du, c1) == pytest.approx(
        C.evaluate(u, C.Chain(0, "primal", C.boundary_1(m) @ c1.coefficients)), abs=1e-12)
    w = C.Cochain(1, "primal", rng.normal(size=m.n_edges))
    c2 = C.Chain(2, "primal", rng.integers(-3, 4, m.n_triangles))
    dw = C.apply(C.derivative_1(m), w, 2)
    assert C.evaluate(dw, c2) == pytest.approx(
        C.evaluate(w, C.Chain(1, "primal", C.boundary_2(m) @ c2.coefficients)), abs=1e-12)


def test_triplet_round_trip():
    m = generate_perturbed_mesh(3, 0.3, 0)
    for op in (C.boundary_2(m), C.hodge_star_1(m, build_dual(m))):
        text = C.to_triplets(op)
        head = text.splitlines()[0].split()
        assert [int(x) for x in head] == [op.shape[0], op.shape[1], op.nnz]
        back = C.from_triplets(text)
        assert back.shape == op.shape
        assert abs(back - op).max() == 0


def test_triplets_sorted_and_integer():
    m = generate_square_mesh(1, "diagonal")
    lines = C.to_triplets(C.boundary_1(m)).splitlines()[1:]
    keys = [tuple(int(x) for x in ln.split()[:2]) for ln in lines]
    assert keys == sorted(keys)
    assert all(ln.split()[2] in ("1", "-1") for ln in lines)


def test_apply_checks_shape(two_square):
    with pytest.raises(DimensionMismatch):
        C.apply(sp.eye(3, format="csr"), C.Cochain(0, "primal", np.ones(4)), 0)
