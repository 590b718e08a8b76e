"""Counter-based random streams shared by the walk engines.

Every particle gets its own splitmix64 stream derived purely from
``(master_seed, particle_index)``, so runs are reproducible regardless of
how trials are scheduled across processes.  The numba kernels inline the
same arithmetic; :class:`CounterRng` is the pure-Python mirror used by the
reference walkers and the tests that pin the two paths together.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_PARTICLE_SALT = 0xD1342543DE82EF95


def mix64(z: int) -> int:
    """splitmix64 finalizer (Stafford mix13)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_base(master_seed: int, index: int) -> int:
    """State base of the counter stream for particle/trial ``index``."""
    return mix64((master_seed ^ mix64((index * _PARTICLE_SALT) & _MASK)) & _MASK)


def stream_draw(base: int, counter: int) -> int:
    """``counter``-th 64-bit output of the stream with the given base."""
    return mix64((base + (counter + 1) * GOLDEN) & _MASK)


def trial_seed(master_seed: int, index: int) -> int:
    """Derive a per-trial 64-bit seed from the master seed."""
    return stream_draw(mix64(master_seed), index)


class CounterRng:
    """Pure-Python view of one particle stream; mirrors the numba kernels."""

    def __init__(self, master_seed: int, index: int):
        self.base = stream_base(master_seed, index)
        self.counter = 0
        self._bits = 0
        self._nbits = 0

    def next_u64(self) -> int:
        out = stream_draw(self.base, self.counter)
        self.counter += 1
        return out

    def next_unit(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_direction(self) -> int:
        """Two-bit draw in {0,1,2,3}; 32 directions are cut per 64-bit word."""
        if self._nbits == 0:
            self._bits = self.next_u64()
            self._nbits = 32
        d = self._bits & 3
        self._bits >>= 2
        self._nbits -= 1
        return d


# numba twins ---------------------------------------------------------------

_U = np.uint64


@njit(uint64(uint64), cache=True, inline="always")
def nb_mix64(z):
    z = (z ^ (z >> _U(30))) * _U(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U(27))) * _U(0x94D049BB133111EB)
    return z ^ (z >> _U(31))


@njit(uint64(uint64, uint64), cache=True, inline="always")
def nb_stream_base(master_seed, index):
    return nb_mix64(master_seed ^ nb_mix64(index * _U(0xD1342543DE82EF95)))


@njit(uint64(uint64, uint64), cache=True, inline="always")
def nb_stream_draw(base, counter):
    return nb_mix64(base + (counter + _U(1)) * _U(0x9E3779B97F4A7C15))
