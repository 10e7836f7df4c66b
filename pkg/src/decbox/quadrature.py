"""Symmetric quadrature rules on triangles, in barycentric coordinates."""

import numpy as np

_A1, _B1 = 0.059715871789770, 0.470142064105115
_A2, _B2 = 0.797426985353087, 0.101286507323456

# order -> (barycentric points (q, 3), weights summing to 1)
RULES = {
    1: (np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0])),
    2: (
        np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]),
        np.full(3, 1 / 3),
    ),
    # 7-point degree-5 rule (Dunavant)
    5: (
        np.array(
            [
                [1 / 3, 1 / 3, 1 / 3],
                [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
                [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
            ]
        ),
        np.array([0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3),
    ),
}


def rule(order):
    try:
        return RULES[order]
    except KeyError:
        raise ValueError(f"no quadrature rule of order {order}; choose from {sorted(RULES)}") from None


def points_and_weights(corners, order, signed_areas):
    """Quadrature nodes ``(m, q, 2)`` and weights ``(m, q)`` for stacked triangles.

    ``corners`` has shape (m, 3, 2). Weights are scaled by ``signed_areas``,
    so negatively oriented triangles subtract.
    """
    bary, w = rule(order)
    pts = np.einsum("qk,mkd->mqd", bary, corners)
    return pts, np.asarray(signed_areas)[:, None] * w[None, :]
