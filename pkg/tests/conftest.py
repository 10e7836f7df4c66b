import math
import sys

import pytest

from decbox.mesh import build_mesh, generate_perturbed_mesh, generate_square_mesh

from oracles import equilateral_patch

SQRT3 = math.sqrt(3.0)


@pytest.fixture
def single_triangle():
    return build_mesh([(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])


@pytest.fixture
def equilateral():
    return build_mesh([(0, 0), (1, 0), (0.5, SQRT3 / 2)], [(0, 1, 2)])


@pytest.fixture
def two_square():
    return build_mesh([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1, 2), (0, 2, 3)])


@pytest.fixture
def acute_patch():
    return build_mesh(*equilateral_patch(4, 5))


def mesh_fleet():
    """Small mixed set used by property-style tests."""
    return [
        ("diagonal-3", generate_square_mesh(3, "diagonal")),
        ("crisscross-2", generate_square_mesh(2, "crisscross")),
        ("perturbed-6", generate_perturbed_mesh(6, 0.4, 11)),
        ("perturbed-8", generate_perturbed_mesh(8, 0.3, 1)),
        ("equilateral", build_mesh(*equilateral_patch(3, 4))),
    ]


FLEET = mesh_fleet()


@pytest.fixture(params=[m for _, m in FLEET], ids=[n for n, _ in FLEET])
def fleet_mesh(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = list(module.summary_lines()) if module else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
