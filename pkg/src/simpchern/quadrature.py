"""Grundmann-Moeller quadrature on the standard simplex.

The rule of index ``s`` on the r-simplex integrates polynomials of total
degree ``2s + 1`` exactly over ``T_r = {x in R^r : x_i >= 0, sum x_i <= 1}``
(equivalently over barycentric coordinates ``t_0..t_r``).  Weights are
computed in exact rational arithmetic and converted to floats once.

Reference: A. Grundmann and H. M. Moeller, Invariant integration formulas
for the n-simplex by combinatorial methods, SIAM J. Numer. Anal. 15 (1978).
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = ["grundmann_moeller", "integrate_simplex"]


def _partitions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative ints summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _partitions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def grundmann_moeller(s: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the index-``s`` rule on the ``dim``-simplex.

    Returns ``(nodes, weights)`` with ``nodes`` of shape ``(N, dim + 1)``
    in barycentric coordinates; ``sum(weights) == 1/dim!``, the volume of
    the simplex with respect to ``dt_1 .. dt_dim``.
    """
    if s < 0 or dim < 0:
        raise ValueError("order and dimension must be nonnegative")
    if dim == 0:
        return np.ones((1, 1)), np.ones(1)
    d = 2 * s + 1
    n = dim
    points: dict[tuple[Fraction, ...], Fraction] = {}
    for i in range(s + 1):
        denom = d + n - 2 * i
        w = (
            Fraction((-1) ** i)
            * Fraction(denom**d, 2 ** (2 * s))
            / (math.factorial(i) * math.factorial(d + n - i))
        )
        for beta in _partitions(s - i, n + 1):
            node = tuple(Fraction(2 * b + 1, denom) for b in beta)
            points[node] = points.get(node, Fraction(0)) + w
    nodes = np.array([[float(x) for x in node] for node in points], dtype=float)
    weights = np.array([float(w) for w in points.values()], dtype=float)
    return nodes, weights


def integrate_simplex(f, s: int, dim: int) -> complex:
    """Integrate a callable of barycentric coordinates over the simplex."""
    nodes, weights = grundmann_moeller(s, dim)
    total = 0.0 + 0.0j
    for node, w in zip(nodes, weights):
        total += w * f(node)
    return total
