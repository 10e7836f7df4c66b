"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import assembly, calculus
from .dual import build_dual, dual_table, well_centered_report
from .errors import DecError, MeshError, NoInteriorVertices, NumericalError
from .fields import parse_source
from .harness import ExperimentConfig, FleetReport, check_equivalence, run_convergence
from .mesh import generate_perturbed_mesh, generate_square_mesh, load_mesh, save_mesh
from .solver import DEFAULT_TOL, attach_errors, solve_cg, write_solution_csv

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2


def cmd_gen(args):
    if args.shape != "square":
        raise ValueError(f"unsupported shape {args.shape!r}")
    if args.perturb:
        mesh = generate_perturbed_mesh(args.n, args.perturb, args.seed, pattern=args.pattern)
    else:
        mesh = generate_square_mesh(args.n, args.pattern)
    save_mesh(mesh, args.output)
    n0, n1, n2 = mesh.counts
    print(f"wrote {args.output}: N0={n0} N1={n1} N2={n2}")
    return EXIT_OK


def cmd_check(args):
    mesh = load_mesh(args.mesh)
    dual = build_dual(mesh)
    n0, n1, n2 = mesh.counts
    area = float(mesh.areas.sum())
    print(f"vertices {n0}, edges {n1}, triangles {n2}")
    print(f"euler characteristic {mesh.euler_characteristic}")
    print(f"boundary vertices {int(mesh.boundary_vertices.sum())}, "
          f"interior vertices {len(mesh.interior_vertices)}")
    print(f"flipped on input {int(mesh.flipped.sum())}")
    print(f"sum |t| = {area!r}")
    print(f"sum kites - sum |t| = {dual.kite_areas.sum() - area:.3e}")
    print(f"sum |b_i| - sum |t| = {dual.box_areas.sum() - area:.3e}")
    for line in well_centered_report(mesh, dual).lines():
        print(line)
    if args.dump_dual:
        Path(args.dump_dual).write_text(dual_table(mesh, dual))
    return EXIT_OK


def cmd_solve(args):
    mesh = load_mesh(args.mesh)
    dual = build_dual(mesh)
    f, solution = parse_source(args.f)
    wc = well_centered_report(mesh, dual)
    if not wc.well_centered:
        logging.warning("%d of %d triangles are not well-centered", wc.n_offenders, wc.n_triangles)
    try:
        system = assembly.assemble_system(mesh, dual, f, args.method, args.quadrature)
    except NoInteriorVertices:
        print("no interior vertices: the solution is identically zero")
        if args.dump_solution:
            write_solution_csv(mesh, np.zeros(mesh.n_vertices), args.dump_solution)
        return EXIT_OK
    report = solve_cg(system, tol=args.tol)
    if solution is not None:
        attach_errors(report, mesh, solution, args.quadrature)
    report.extra["not_well_centered"] = wc.n_offenders
    sys.stdout.write(report.to_text())
    if args.dump_solution:
        write_solution_csv(mesh, report.solution, args.dump_solution)
    return EXIT_OK


def cmd_compare(args):
    mesh = load_mesh(args.mesh)
    dual = build_dual(mesh)
    rng = np.random.default_rng(args.seed)
    entry = check_equivalence(Path(args.mesh).name, mesh, dual, rng)
    for line in FleetReport([entry], 1e-12, 1e-13).lines():
        print(line)
    print(f"stiffness DEC vs FEM: {entry.matrix}")
    print(f"rhs DEC vs box (box-piecewise-constant f): {entry.rhs}")
    f, _ = parse_source(args.f)
    smooth = assembly.compare_vectors(assembly.assemble_rhs_dec(mesh, dual, f),
                                      assembly.assemble_rhs_box(mesh, dual, f))
    print(f"rhs DEC vs box (f = {f.name}, informational): {smooth}")
    if args.export:
        out = Path(args.export)
        out.mkdir(parents=True, exist_ok=True)
        (out / "stiffness_dec.txt").write_text(calculus.to_triplets(assembly.assemble_dec(mesh, dual)))
        (out / "stiffness_fem.txt").write_text(calculus.to_triplets(assembly.assemble_fem(mesh)))
        (out / "boundary_1.txt").write_text(calculus.to_triplets(calculus.boundary_1(mesh)))
        (out / "boundary_2.txt").write_text(calculus.to_triplets(calculus.boundary_2(mesh)))
        (out / "hodge_star_1.txt").write_text(calculus.to_triplets(calculus.hodge_star_1(mesh, dual)))
    return EXIT_OK if entry.passed else EXIT_NUMERICAL


def cmd_converge(args):
    config = ExperimentConfig(
        pattern=args.pattern,
        levels=args.levels,
        n0=args.n0,
        perturb=args.perturb,
        seed=args.seed,
        solution=args.solution,
        quadrature_order=args.quadrature,
        tol=args.tol,
        csv_path=args.out,
        svg_path=args.plot,
    )
    rows = run_convergence(config)
    for r in rows:
        orders = "" if r.order_energy is None else (
            f" order_energy={r.order_energy:.3f} order_l2={r.order_l2:.3f}")
        print(f"n={r.n} energy={r.energy_err_dec:.4e} l2={r.l2_err_dec:.4e} "
              f"not-well-centered={r.not_well_centered}{orders}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="decbox", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a unit-square mesh")
    p.add_argument("--shape", default="square")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pattern", choices=("diagonal", "crisscross"), default="diagonal")
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="mesh and dual audit")
    p.add_argument("mesh")
    p.add_argument("--dump-dual", metavar="PATH")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="solve -laplace(u) = f with u = 0 on the boundary")
    p.add_argument("mesh")
    p.add_argument("--f", default="sine", help="'sine', 'poly' or a constant")
    p.add_argument("--method", choices=assembly.METHODS, default="dec")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--quadrature", type=int, default=2, choices=(1, 2, 5))
    p.add_argument("--dump-solution", metavar="CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="DEC/FEM/box equivalence report")
    p.add_argument("mesh")
    p.add_argument("--f", default="sine")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--export", metavar="DIR", help="write operators as coordinate triplets")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("converge", help="convergence study on the manufactured solution")
    p.add_argument("--pattern", choices=("diagonal", "crisscross"), default="crisscross")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--n0", type=int, default=4)
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solution", choices=("sine", "poly"), default="sine")
    p.add_argument("--quadrature", type=int, default=2, choices=(1, 2, 5))
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", required=True)
    p.add_argument("--plot")
    p.set_defaults(func=cmd_converge)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (MeshError, DecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
