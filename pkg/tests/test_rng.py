import numpy as np

from idla_lab._rng import (
    CounterRng,
    mix64,
    nb_mix64,
    nb_stream_base,
    nb_stream_draw,
    stream_base,
    stream_draw,
    trial_seed,
)


def test_python_and_numba_streams_agree():
    for master in (0, 1, 2**63 + 17, 2**64 - 1):
        for k in (1, 2, 1000):
            base = stream_base(master, k)
            assert base == int(nb_stream_base(np.uint64(master), np.uint64(k)))
            for c in range(5):
                assert stream_draw(base, c) == int(nb_stream_draw(np.uint64(base), np.uint64(c)))


def test_mix64_matches_numba():
    for z in (0, 1, 0xDEADBEEF, 2**64 - 1):
        assert mix64(z) == int(nb_mix64(np.uint64(z)))


def test_counter_rng_is_replayable():
    a = CounterRng(42, 7)
    b = CounterRng(42, 7)
    seq = [a.next_u64(), a.next_unit(), a.next_direction(), a.next_direction(), a.next_u64()]
    rep = [b.next_u64(), b.next_unit(), b.next_direction(), b.next_direction(), b.next_u64()]
    assert seq == rep


def test_streams_differ_across_particles():
    xs = {CounterRng(9, k).next_u64() for k in range(100)}
    assert len(xs) == 100


def test_unit_draws_in_range():
    rng = CounterRng(3, 5)
    us = [rng.next_unit() for _ in range(1000)]
    assert all(0.0 <= u < 1.0 for u in us)
    assert 0.4 < np.mean(us) < 0.6


def test_direction_bits_are_balanced():
    rng = CounterRng(11, 2)
    counts = np.bincount([rng.next_direction() for _ in range(4000)], minlength=4)
    assert counts.min() > 850  # ~1000 each, generous slack


def test_trial_seed_is_pure_function():
    assert trial_seed(5, 0) == trial_seed(5, 0)
    assert trial_seed(5, 0) != trial_seed(5, 1)
    assert 0 <= trial_seed(2**64 - 1, 10**9) < 2**64
