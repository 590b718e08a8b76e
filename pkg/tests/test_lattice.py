from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from idla_lab.lattice import (
    DIHEDRAL,
    apply_dihedral,
    apply_inverse_dihedral,
    ball_count,
    ball_points,
    in_ball,
    norm,
    sector_reduce,
)

coords = st.integers(min_value=-200, max_value=200)


def test_dihedral_group_is_complete():
    images = {tuple(apply_dihedral(i, (2, 1))) for i in range(8)}
    assert len(images) == 8  # (2,1) has trivial stabiliser


@given(coords, coords)
def test_sector_reduce_lands_in_octant(x, y):
    (cx, cy), idx = sector_reduce((x, y))
    assert 0 <= cy <= cx
    assert apply_dihedral(idx, (x, y)) == (cx, cy)
    assert cx * cx + cy * cy == x * x + y * y


@given(st.integers(0, 7), coords, coords)
def test_inverse_dihedral(i, x, y):
    assert apply_inverse_dihedral(i, apply_dihedral(i, (x, y))) == (x, y)


def test_norm():
    assert norm((3, 4)) == 5.0
    assert norm((0, 0)) == 0.0


def test_strict_ball_convention():
    # boundary sites are excluded: x^2 + y^2 < r^2 strictly
    assert not in_ball((5, 0), 25)
    assert not in_ball((4, 3), Fraction(25))  # boundary site: 16 + 9 = 25
    assert in_ball((3, 3), 25)
    assert in_ball((0, 0), Fraction(1, 100))


@pytest.mark.parametrize("r2", [1, 2, 25, Fraction(25), Fraction(49, 4), 10.5])
def test_ball_points_match_brute_force(r2):
    pts = {tuple(p) for p in ball_points(r2)}
    lim = 10
    brute = {
        (x, y)
        for x in range(-lim, lim + 1)
        for y in range(-lim, lim + 1)
        if in_ball((x, y), Fraction(r2) if isinstance(r2, float) else r2)
    }
    assert pts == brute
    assert ball_count(r2) == len(brute)


def test_ball_empty():
    assert ball_points(0).shape == (0, 2)
    assert ball_points(Fraction(-3)).shape == (0, 2)
