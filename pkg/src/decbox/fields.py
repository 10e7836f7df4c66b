"""Scalar fields and manufactured solutions for the Poisson problem."""

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class ScalarField:
    """Named function of position, vectorized over ``x`` and ``y`` arrays."""

    name: str
    func: Callable

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.func(x, np.asarray(y, dtype=float)), float), x.shape)

    def sample(self, points, owners=None):
        """Values at ``points`` (..., 2). ``owners`` names the box each point
        was drawn from; smooth fields ignore it."""
        points = np.asarray(points, dtype=float)
        return self(points[..., 0], points[..., 1])


def constant(c):
    c = float(c)
    return ScalarField(f"const({c!r})", lambda x, y: np.full_like(x, c))


class BoxPiecewiseConstant(ScalarField):
    """Field taking the value ``values[i]`` on box ``b_i``.

    Box membership of an arbitrary point is ambiguous once boxes overlap
    (non-well-centered meshes), so sampling relies on the owner index the
    assembler supplies rather than on point location.
    """

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "name", "box-piecewise-constant")
        object.__setattr__(self, "func", None)

    def __call__(self, x, y):
        raise TypeError("a box-piecewise-constant field must be sampled with owners")

    def sample(self, points, owners=None):
        if owners is None:
            raise TypeError("a box-piecewise-constant field must be sampled with owners")
        return self.values[np.asarray(owners)]


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact solution ``u`` with zero trace on the unit square and ``f = -laplace(u)``."""

    name: str
    u: ScalarField
    grad: Callable
    f: ScalarField


def _sine():
    pi = np.pi
    u = ScalarField("sin(pi x) sin(pi y)", lambda x, y: np.sin(pi * x) * np.sin(pi * y))
    f = ScalarField(
        "2 pi^2 sin(pi x) sin(pi y)", lambda x, y: 2 * pi * pi * np.sin(pi * x) * np.sin(pi * y)
    )

    def grad(x, y):
        return np.stack(
            [pi * np.cos(pi * x) * np.sin(pi * y), pi * np.sin(pi * x) * np.cos(pi * y)], axis=-1
        )

    return ManufacturedSolution("sine", u, grad, f)


def _poly():
    u = ScalarField("x(1-x)y(1-y)", lambda x, y: x * (1 - x) * y * (1 - y))
    f = ScalarField("2(x(1-x)+y(1-y))", lambda x, y: 2 * (x * (1 - x) + y * (1 - y)))

    def grad(x, y):
        return np.stack([(1 - 2 * x) * y * (1 - y), x * (1 - x) * (1 - 2 * y)], axis=-1)

    return ManufacturedSolution("poly", u, grad, f)


SOLUTIONS = {"sine": _sine(), "poly": _poly()}


def manufactured(name):
    try:
        return SOLUTIONS[name]
    except KeyError:
        raise ValueError(f"unknown manufactured solution {name!r}; choose from {sorted(SOLUTIONS)}") from None


def parse_source(token):
    """Right-hand side from a CLI token: a manufactured-solution name or a number.

    Returns ``(f, solution_or_None)``.
    """
    if token in SOLUTIONS:
        sol = SOLUTIONS[token]
        return sol.f, sol
    try:
        return constant(float(token)), None
    except ValueError:
        raise ValueError(
            f"--f must be one of {sorted(SOLUTIONS)} or a number, got {token!r}"
        ) from None
