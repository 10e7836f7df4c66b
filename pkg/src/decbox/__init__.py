"""Discrete exterior calculus for the 2D Poisson problem, checked against
linear finite elements and the box method."""

from .assembly import (
    apply_dirichlet,
    assemble_dec,
    assemble_fem,
    assemble_rhs_box,
    assemble_rhs_dec,
    assemble_system,
    compare_matrices,
)
from .dual import build_dual, circumcenter, circumcentric_subdivision, well_centered_report
from .mesh import (
    TriangleMesh,
    build_mesh,
    generate_perturbed_mesh,
    generate_square_mesh,
    load_mesh,
    save_mesh,
)
from .solver import solve_cg

__version__ = "0.1.0"
