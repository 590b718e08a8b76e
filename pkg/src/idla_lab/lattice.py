"""Shared lattice geometry: dihedral symmetries and discrete balls.

Points of Z^2 are plain ``(x, y)`` integer tuples throughout the package,
identified with the Gaussian integer ``x + iy`` where complex arithmetic is
convenient.  The lattice ball convention is strict everywhere:

    B_r = {(x, y) : x^2 + y^2 < r^2}.

Ball membership is evaluated in exact integer/rational arithmetic when the
squared radius is supplied as an ``int`` or ``Fraction``, so boundary sites
are classified bit-reproducibly.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

Point = tuple[int, int]

#: The eight symmetries of the square, as (a, b, c, d) acting by
#: (x, y) -> (a*x + b*y, c*x + d*y).  Index 0 is the identity.
DIHEDRAL: tuple[tuple[int, int, int, int], ...] = (
    (1, 0, 0, 1),
    (-1, 0, 0, 1),
    (1, 0, 0, -1),
    (-1, 0, 0, -1),
    (0, 1, 1, 0),
    (0, -1, 1, 0),
    (0, 1, -1, 0),
    (0, -1, -1, 0),
)


def apply_dihedral(index: int, z: Point) -> Point:
    """Apply the ``index``-th symmetry of the square to a lattice point."""
    a, b, c, d = DIHEDRAL[index]
    x, y = z
    return (a * x + b * y, c * x + d * y)


def apply_inverse_dihedral(index: int, z: Point) -> Point:
    """Apply the inverse of the ``index``-th symmetry (transpose: all are orthogonal)."""
    a, b, c, d = DIHEDRAL[index]
    x, y = z
    return (a * x + c * y, b * x + d * y)


def sector_reduce(z: Point) -> tuple[Point, int]:
    """Map ``z`` into the first octant ``{0 <= y <= x}``.

    Returns the canonical representative and the index of a dihedral map
    carrying ``z`` onto it.  When several maps work (``z`` on an axis or
    diagonal) the lowest index is chosen, so the result is deterministic.
    """
    for i in range(8):
        x, y = apply_dihedral(i, z)
        if 0 <= y <= x:
            return (x, y), i
    raise AssertionError("unreachable: dihedral orbit misses the octant")


def norm(z: Point) -> float:
    """Euclidean norm |z|, in double precision."""
    x, y = z
    return math.hypot(float(x), float(y))


def in_ball(z: Point, r_squared) -> bool:
    """Strict-ball membership ``x^2 + y^2 < r_squared``.

    Exact when ``r_squared`` is an ``int`` or ``Fraction``; a float
    ``r_squared`` is compared exactly against the integer ``x^2 + y^2``
    (Python promotes the int side exactly for magnitudes in range).
    """
    x, y = z
    return x * x + y * y < r_squared


def _row_half_width(t) -> int:
    """Largest integer ``x >= 0`` with ``x^2 < t``, or -1 if none (t <= 0)."""
    if t <= 0:
        return -1
    if isinstance(t, float):
        t = Fraction(t)
    # x^2 < t  <=>  x^2 <= ceil(t) - 1
    if isinstance(t, Fraction) and t.denominator != 1:
        bound = t.numerator // t.denominator  # floor of a non-integer
    else:
        bound = int(t) - 1
    if bound < 0:
        return -1
    return math.isqrt(bound)


def ball_points(r_squared) -> np.ndarray:
    """All lattice points with ``x^2 + y^2 < r_squared``, as an (N, 2) array.

    Enumerates row by row with exact integer bounds; ordering is by ``y``
    then ``x``, so it is reproducible.  ``r_squared`` may be ``int``,
    ``Fraction`` or ``float`` (a float is converted exactly).
    """
    if isinstance(r_squared, float):
        r_squared = Fraction(r_squared)
    y_max = _row_half_width(r_squared)
    if y_max < 0:
        return np.empty((0, 2), dtype=np.int64)
    rows = []
    for y in range(-y_max, y_max + 1):
        x_max = _row_half_width(r_squared - y * y)
        xs = np.arange(-x_max, x_max + 1, dtype=np.int64)
        row = np.empty((xs.size, 2), dtype=np.int64)
        row[:, 0] = xs
        row[:, 1] = y
        rows.append(row)
    return np.concatenate(rows, axis=0)


def ball_count(r_squared) -> int:
    """Number of lattice points in the strict ball, #B_r with r^2 given."""
    if isinstance(r_squared, float):
        r_squared = Fraction(r_squared)
    y_max = _row_half_width(r_squared)
    total = 0
    for y in range(-y_max, y_max + 1):
        x_max = _row_half_width(r_squared - y * y)
        total += 2 * x_max + 1
    return total
