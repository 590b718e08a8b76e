import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from idla_lab.engine import GrowthHistory, idla_grow
from idla_lab.events import (
    EXAMPLE_SHELL_COUNTS,
    NonpositiveShellError,
    SizeLimitError,
    detect_early,
    detect_late,
    event_complement_check,
    example_shell_cluster,
    lateness_field,
    max_abs_lateness,
    min_tower_energy,
    shell_profile,
    tentacle_scan,
    tower_decompose,
    tower_energy,
)
from idla_lab.lattice import ball_points


def history_from_sites(sites_with_join, half=None) -> GrowthHistory:
    """Synthetic history from explicit (point, join) pairs."""
    pts = [p for p, _ in sites_with_join]
    if half is None:
        half = max((abs(c) for p in pts for c in p), default=0) + 2
    join = np.zeros((2 * half + 1, 2 * half + 1), dtype=np.uint32)
    for (x, y), j in sites_with_join:
        join[x + half, y + half] = j
    return GrowthHistory(n=len(sites_with_join), seed=0, half=half, join=join)


def ball_history(r_squared) -> GrowthHistory:
    pts = sorted(map(tuple, ball_points(r_squared)), key=lambda z: (z[0] ** 2 + z[1] ** 2, z))
    return history_from_sites([(p, i) for i, p in enumerate(pts, start=1)])


# -- early/late detection -----------------------------------------------------


def test_early_handcrafted_arithmetic():
    # pack a ball and give one far site an early join index
    sites = [(p, i) for i, p in enumerate(sorted(map(tuple, ball_points(16))), start=2)]
    h = history_from_sites([((10, 0), 1)] + sites, half=14)
    # |z| = 10, m = 3: flagged iff join <= floor(pi * 49) = 153
    hits = detect_early(h, 3.0, h.n)
    assert ((10, 0), 1) in hits
    # every flag satisfies the definition
    for (x, y), j in hits:
        assert j <= math.pi * (math.hypot(x, y) - 3.0) ** 2


def test_origin_is_not_early():
    h = ball_history(9)
    assert all(z != (0, 0) for z, _ in detect_early(h, 0.1, h.n))
    assert all(z != (0, 0) for z, _ in detect_early(h, 5.0, h.n))


def test_early_empty_beyond_outer_radius():
    h = idla_grow(500, 3)
    from idla_lab.engine import outer_radius

    assert detect_early(h, outer_radius(h) + 1.0, h.n) == []


def test_late_handcrafted_arithmetic():
    # z = (3, 0) joining at 200: late for ell = 1 iff 200 > floor(16 pi) = 50
    pts = sorted(map(tuple, ball_points(130)), key=lambda z: (z[0] ** 2 + z[1] ** 2, z))
    pairs = []
    next_join = 1
    for p in pts:
        if p == (3, 0):
            continue
        pairs.append((p, next_join))
        next_join += 1
    pairs.append(((3, 0), next_join))
    h = history_from_sites(pairs)
    assert next_join > 200  # the swapped site joins last, well past the deadline
    assert (3, 0) in detect_late(h, 1.0, h.n)


def test_late_empty_cases():
    ball = ball_history(64)
    assert detect_late(ball, 2.0, ball.n) == []
    h = idla_grow(100, 11)
    assert detect_late(h, math.sqrt(100 / math.pi) + 1, 100) == []


def test_complement_identity_on_simulated_histories():
    for seed in range(4):
        h = idla_grow(3000, seed)
        for m, ell in itertools.product((0.5, 2.0, 5.0), (0.5, 2.0, 5.0)):
            assert event_complement_check(h, m, ell, h.n)
            assert event_complement_check(h, m, ell, h.n // 2)


def test_complement_identity_on_planted_histories():
    # planted early point: both routes must flag it
    sites = [(p, i) for i, p in enumerate(sorted(map(tuple, ball_points(16))), start=2)]
    early = history_from_sites([((10, 0), 1)] + sites, half=14)
    assert detect_early(early, 3.0, early.n)
    assert event_complement_check(early, 3.0, 3.0, early.n)

    # planted late point (a hole deep inside a packed ball)
    pts = sorted(map(tuple, ball_points(130)), key=lambda z: (z[0] ** 2 + z[1] ** 2, z))
    pairs = [(p, i) for i, p in enumerate(pts, start=1) if p != (3, 0)]
    late = history_from_sites(pairs)
    late.n = len(pairs)
    assert detect_late(late, 1.0, late.n)
    assert event_complement_check(late, 1.0, 1.0, late.n)

    # single-particle history
    one = idla_grow(1, 0)
    assert event_complement_check(one, 1.0, 1.0, 1)
    assert event_complement_check(one, 0.25, 0.25, 1)


# -- lateness field -------------------------------------------------------------


def test_lateness_values():
    one = idla_grow(1, 0)
    field = lateness_field(one)
    assert field[(0, 0)] == pytest.approx(math.sqrt(1 / math.pi))

    ball = ball_history(100)
    vals = lateness_field(ball)
    bound = 1.0 + math.sqrt(1 / math.pi)
    assert all(abs(v) <= bound for v in vals.values())
    assert max_abs_lateness(ball) <= bound


def test_lateness_monotone_in_join_index():
    ball = ball_history(36)
    z = (3, 3)
    j = ball.join_at(z)
    earlier = ball.join.copy()
    field_before = lateness_field(ball)[z]
    # swap z's join index with an earlier particle
    other = np.argwhere(ball.join == j - 5)[0]
    earlier[z[0] + ball.half, z[1] + ball.half] = j - 5
    earlier[other[0], other[1]] = j
    h2 = GrowthHistory(n=ball.n, seed=0, half=ball.half, join=earlier)
    assert lateness_field(h2)[z] < field_before


# -- tentacles -------------------------------------------------------------------


def test_tentacle_scan_on_ball_and_path():
    ball = ball_history(400)
    assert tentacle_scan(ball, ball.n, 0.5, 5) == []
    assert tentacle_scan(ball, ball.n, 0.0, 5) == []

    path = history_from_sites([((i, 0), i + 1) for i in range(50)], half=60)
    flagged = tentacle_scan(path, path.n, 0.5, 10)
    assert (49, 0) in flagged  # the tip sees at most ~19 of 50 path sites


def test_tentacle_counts_match_brute_force():
    h = idla_grow(400, 21)
    m, b = 4, 0.8
    flagged = set(tentacle_scan(h, h.n, b, m))
    sites = [tuple(p) for p in h.sites()]
    site_set = set(sites)
    brute = set()
    for z in sites:
        if z[0] ** 2 + z[1] ** 2 < m * m:
            continue
        count = sum(
            1
            for dx in range(-m + 1, m)
            for dy in range(-m + 1, m)
            if dx * dx + dy * dy < m * m and (z[0] + dx, z[1] + dy) in site_set
        )
        if count <= b * m * m:
            brute.add(z)
    assert flagged == brute


# -- shells ----------------------------------------------------------------------


def test_shell_profile_single_site():
    prof = shell_profile([(5, 5)], (5, 5), 2)
    assert prof.a == (0, 0, 1)


def test_shell_profile_worked_example():
    cluster = example_shell_cluster((3, -2))
    prof = shell_profile(cluster, (3, -2), 12)
    assert prof.a == EXAMPLE_SHELL_COUNTS
    assert prof.total == sum(EXAMPLE_SHELL_COUNTS)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 6), st.sets(st.tuples(st.integers(-9, 9), st.integers(-9, 9)), max_size=60))
def test_shell_partition_property(m, sites):
    sites = list(sites)
    prof = shell_profile(sites, (1, -1), m)
    in_box = sum(1 for (x, y) in sites if max(abs(x - 1), abs(y + 1)) <= m)
    assert prof.total == in_box
    assert len(prof.a) == m + 1


def test_shell_profile_from_history():
    h = idla_grow(200, 4)
    prof = shell_profile(h, (0, 0), 5)
    brute = [0] * 6
    for x, y in map(tuple, h.sites()):
        c = max(abs(x), abs(y))
        if c <= 5:
            brute[5 - c] += 1
    assert prof.a == tuple(brute)


# -- towers ----------------------------------------------------------------------


def test_tower_worked_example():
    d = tower_decompose(EXAMPLE_SHELL_COUNTS, c_prime=0.5, d=2)
    assert d.beta == (5, 3, 2, 3)
    assert d.alpha == (0, 5, 8, 10, 13)
    assert d.step_sequence() == (5, 5, 5, 5, 5, 3, 3, 3, 2, 2, 3, 3, 3)
    assert sum(d.beta) == len(EXAMPLE_SHELL_COUNTS)  # = m + 1
    assert d.tail_unconstrained
    assert d.windows_ok()
    assert tower_energy(d) == 25 + 18 + 12 + 36 == 91


def test_tower_all_ones():
    d = tower_decompose((1, 1, 1, 1), c_prime=1.0, d=2)
    assert d.beta == (1, 1, 1, 1)
    assert d.windows_ok()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 12), min_size=1, max_size=25), st.sampled_from([0.5, 1.0, 2.0]))
def test_tower_invariants_random(a, c_prime):
    d = tower_decompose(a, c_prime=c_prime, d=2)
    assert sum(d.beta) == len(a)
    assert d.windows_ok()
    assert len(d.step_sequence()) == len(a)
    # greedy energy dominates the exact minimum
    if len(a) <= 20:
        best, _ = min_tower_energy(len(a) - 1)
        assert tower_energy(d) >= best


def test_tower_errors():
    with pytest.raises(NonpositiveShellError):
        tower_decompose((2, 0, 1), c_prime=0.5)
    with pytest.raises(ValueError):
        tower_decompose((), c_prime=0.5)
    with pytest.raises(SizeLimitError):
        min_tower_energy(100)


def test_tower_energy_closed_forms():
    assert tower_energy((7,), d=2) == 49
    k = 9
    assert tower_energy((1,) * k, d=2) == k * (k + 1) // 2


def test_min_tower_energy_small_cases():
    assert min_tower_energy(0) == (1, (1,))
    best, seq = min_tower_energy(2)
    assert best == 6 and sum(seq) == 3
    assert tower_energy(seq) == 6


def test_min_tower_energy_matches_enumeration():
    def compositions(total):
        if total == 0:
            yield ()
            return
        for first in range(1, total + 1):
            for rest in compositions(total - first):
                yield (first,) + rest

    for m in range(0, 8):
        brute = min(tower_energy(c) for c in compositions(m + 1))
        best, seq = min_tower_energy(m)
        assert best == brute
        assert sum(seq) == m + 1 and tower_energy(seq) == best
