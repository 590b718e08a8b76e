"""Internal DLA growth on Z^2 with reproducible per-particle randomness.

Each particle performs a simple random walk from the origin until it first
steps on a site outside the current cluster, and occupies it.  The walk is
exact simple random walk: no truncation, fast-forwarding or other
variance-reduction is applied, so the cluster law is untouched.

Particle k draws its steps from a counter-based stream that is a pure
function of ``(seed, k)`` (see :mod:`idla_lab._rng`); a run is therefore a
deterministic function of ``(n, seed)`` on every platform, and independent
trials can be farmed out to processes freely.  The walk itself is integer
arithmetic only.

Join times are recorded in a dense array over a centered square box of
side ``4 sqrt(n/pi) + 64``; growth escaping the box (which would require a
fluctuation of the order of the cluster radius) aborts with an error
rather than wrapping.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
from numba import njit, uint64

from ._rng import nb_stream_base, nb_stream_draw
from .lattice import Point

SNAPSHOT_MAGIC = b"IDLA"
SNAPSHOT_VERSION = 1


class SnapshotError(ValueError):
    """Bad magic, version or layout in a cluster snapshot file."""


class BoxOverflowError(RuntimeError):
    """A walk left the occupancy bounding box."""


@njit(cache=True)
def _grow_core(n, seed, half):
    """Fill join indices for an n-particle run; returns (join, steps, ok)."""
    side = 2 * half + 1
    join = np.zeros((side, side), dtype=np.uint32)
    join[half, half] = 1
    total = uint64(0)
    for k in range(2, n + 1):
        base = nb_stream_base(uint64(seed), uint64(k))
        counter = uint64(0)
        x = half
        y = half
        bits = uint64(0)
        nbits = 0
        while True:
            if nbits == 0:
                bits = nb_stream_draw(base, counter)
                counter += uint64(1)
                nbits = 32
            d = bits & uint64(3)
            bits >>= uint64(2)
            nbits -= 1
            if d == uint64(0):
                x += 1
            elif d == uint64(1):
                x -= 1
            elif d == uint64(2):
                y += 1
            else:
                y -= 1
            total += uint64(1)
            if x < 0 or x >= side or y < 0 or y >= side:
                return join, total, False
            if join[x, y] == 0:
                join[x, y] = k
                break
    return join, total, True


@dataclass
class GrowthHistory:
    """A completed run: per-site join indices over a centered box.

    ``join[x + half, y + half]`` is the index (1-based) of the particle
    that occupied ``(x, y)``, or 0 if the site was never reached.  The set
    ``{join <= k, join > 0}`` is the cluster after k particles, for every
    ``k <= n``.
    """

    n: int
    seed: int
    half: int
    join: np.ndarray
    total_steps: int | None = None
    _r2: np.ndarray | None = field(default=None, repr=False)

    def join_at(self, z: Point) -> int:
        ix, iy = z[0] + self.half, z[1] + self.half
        side = 2 * self.half + 1
        if not (0 <= ix < side and 0 <= iy < side):
            return 0
        return int(self.join[ix, iy])

    def contains(self, z: Point, k: int | None = None) -> bool:
        j = self.join_at(z)
        return 0 < j <= (self.n if k is None else k)

    def sites(self, k: int | None = None) -> np.ndarray:
        """Cluster sites after k particles, as an (k, 2) int array."""
        k = self.n if k is None else k
        xs, ys = np.nonzero((self.join > 0) & (self.join <= k))
        out = np.empty((xs.size, 2), dtype=np.int64)
        out[:, 0] = xs - self.half
        out[:, 1] = ys - self.half
        return out

    def r2_grid(self) -> np.ndarray:
        """Squared distance to the origin for every box cell (cached)."""
        if self._r2 is None:
            c = np.arange(-self.half, self.half + 1, dtype=np.int64)
            self._r2 = c[:, None] ** 2 + c[None, :] ** 2
        return self._r2


def box_half_side(n: int) -> int:
    """Half-side of the occupancy box: side ``4 sqrt(n/pi) + 64``."""
    return int(math.ceil(2.0 * math.sqrt(n / math.pi))) + 32


def idla_grow(n: int, seed: int) -> GrowthHistory:
    """Grow an n-particle cluster; deterministic in ``(n, seed)``."""
    if n < 1:
        raise ValueError(f"particle count must be >= 1, got {n}")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in 64 bits")
    half = box_half_side(n)
    join, steps, ok = _grow_core(n, np.uint64(seed), half)
    if not ok:
        raise BoxOverflowError(f"walk left the bounding box (n={n}, seed={seed}, half={half})")
    return GrowthHistory(n=n, seed=seed, half=half, join=join, total_steps=int(steps))


def inner_radius(h: GrowthHistory, k: int | None = None) -> float:
    """``min |z|`` over sites not in the cluster after k particles.

    This is the largest r with ``B_r`` contained in the cluster, under the
    strict-inequality ball convention.
    """
    k = _check_k(h, k)
    outside = (h.join == 0) | (h.join > k)
    return math.sqrt(float(h.r2_grid()[outside].min()))


def outer_radius(h: GrowthHistory, k: int | None = None) -> float:
    """``max |z|`` over cluster sites after k particles."""
    k = _check_k(h, k)
    inside = (h.join > 0) & (h.join <= k)
    return math.sqrt(float(h.r2_grid()[inside].max()))


def _check_k(h: GrowthHistory, k: int | None) -> int:
    if k is None:
        return h.n
    if not 1 <= k <= h.n:
        raise ValueError(f"k must be in 1..{h.n}, got {k}")
    return k


def radius_profiles(h: GrowthHistory) -> tuple[np.ndarray, np.ndarray]:
    """``(inner, outer)`` radii for every prefix, indexed by k = 0..n.

    ``inner[k]`` is :func:`inner_radius` of the k-particle cluster
    (``inner[0] = 0`` for the empty cluster) and ``outer[k]`` likewise
    (``outer[0] = -inf``).  Computed in one pass over the join order.
    """
    r2 = h.r2_grid()
    occupied = h.join > 0
    joins = h.join[occupied].astype(np.int64)
    order = np.argsort(joins, kind="stable")
    dist_by_join = np.sqrt(r2[occupied].astype(np.float64))[order]  # |z| of particle k at k-1

    outer = np.empty(h.n + 1)
    outer[0] = -np.inf
    outer[1:] = np.maximum.accumulate(dist_by_join)

    # complement = never-joined sites (constant floor) + sites joining later
    floor = math.sqrt(float(r2[~occupied].min()))
    suffix = np.empty(h.n + 1)
    suffix[h.n] = np.inf
    suffix[:h.n] = np.minimum.accumulate(dist_by_join[::-1])[::-1]
    inner = np.minimum(suffix, floor)
    return inner, outer


# -- snapshot format ---------------------------------------------------------
#
# Little-endian: magic "IDLA", version u16, n u64, seed u64, half u32, then
# (2*half+1)^2 row-major u32 join indices (0 = never joined).  Row index is
# x + half, column index y + half.

_HEADER = struct.Struct("<4sHQQI")


def write_snapshot(h: GrowthHistory, path) -> None:
    """Write the frozen binary layout; bit-exact round trips are a contract."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, h.n, h.seed, h.half))
        fh.write(np.ascontiguousarray(h.join, dtype="<u4").tobytes())


def read_snapshot(path) -> GrowthHistory:
    """Read a snapshot; raises :class:`SnapshotError` on any layout mismatch."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise SnapshotError(f"{path}: truncated header")
        magic, version, n, seed, half = _HEADER.unpack(head)
        if magic != SNAPSHOT_MAGIC:
            raise SnapshotError(f"{path}: bad magic {magic!r}")
        if version != SNAPSHOT_VERSION:
            raise SnapshotError(f"{path}: unsupported version {version}")
        side = 2 * half + 1
        data = fh.read(4 * side * side)
        if len(data) != 4 * side * side or fh.read(1):
            raise SnapshotError(f"{path}: payload size mismatch")
    join = np.frombuffer(data, dtype="<u4").reshape(side, side).astype(np.uint32)
    return GrowthHistory(n=int(n), seed=int(seed), half=int(half), join=join)
