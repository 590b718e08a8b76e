"""Early/late points, the lateness field, thin tentacles, shells and towers.

A site z is expected to join the cluster around time ``pi |z|^2``.  With
``A(t) = A(floor(t))`` for real t:

* z is m-early at horizon N if it joined by time ``pi (|z| - m)^2`` (and
  ``|z| >= m``; see note below) with join index ``<= N``;
* z is l-late at horizon N if it lies in ``B_{sqrt(N/pi) - l}`` and had not
  joined by time ``pi (|z| + l)^2``.

Taking complements, "no early point up to N" is equivalent to the cluster
being contained in ``B_{sqrt(n/pi) + m}`` for all n <= N, and "no late
point" to the cluster containing ``B_{sqrt(n/pi) - l}`` for all n <= N.
:func:`event_complement_check` verifies this set identity by computing
both sides through independent routes (per-site thresholds vs radius
profiles over the join order).

Note: the raw early formula would also flag sites with ``|z| < m`` (the
square ``(|z| - m)^2`` is blind to sign), which breaks the complement
identity; the detector therefore requires ``|z| >= m``, the regime the
identity is derived in.

The shell/tower half of the module decomposes box-shell occupancy counts
around a point into a tower of squares whose energy lower-bounds the
number of growth trials a thin tentacle would need.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .engine import GrowthHistory, radius_profiles
from .lattice import Point


#: Shell counts of the worked tentacle example used by the demos and gates
#: (a 12-shell cluster whose greedy tower is (5, 3, 2, 3)).
EXAMPLE_SHELL_COUNTS: tuple[int, ...] = (4, 1, 2, 2, 2, 1, 2, 1, 1, 1, 3, 3, 1)


def example_shell_cluster(center: Point = (0, 0)) -> np.ndarray:
    """A concrete site set realising :data:`EXAMPLE_SHELL_COUNTS`.

    Places the prescribed number of sites in each square shell around the
    center (the shell counts, not the exact shape, are what the tower
    construction consumes).
    """
    m = len(EXAMPLE_SHELL_COUNTS) - 1
    pts = []
    for j, count in enumerate(EXAMPLE_SHELL_COUNTS):
        s = m - j  # Chebyshev radius of shell j
        ring = []
        for t in range(-s, s + 1):
            ring.extend([(s, t), (-s, t)])
            if abs(t) != s:
                ring.extend([(t, s), (t, -s)])
        ring = sorted(set(ring)) if s > 0 else [(0, 0)]
        for x, y in ring[:count]:
            pts.append((center[0] + x, center[1] + y))
    return np.array(pts, dtype=np.int64)


class NonpositiveShellError(ValueError):
    """A shell count is zero; the tower construction assumes all >= 1."""


class NoValidBetaError(ValueError):
    """No block size satisfies the window condition (pathological c')."""

    def __init__(self, block_index: int, start: int):
        self.block_index = block_index
        super().__init__(f"no valid block size for block {block_index} starting at shell {start}")


class SizeLimitError(ValueError):
    """Exhaustive tower-energy minimisation requested beyond its size cap."""


def _cluster_coords(h: GrowthHistory, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(x, y, join) arrays of sites with ``0 < join <= k``."""
    sel = (h.join > 0) & (h.join <= k)
    xs, ys = np.nonzero(sel)
    return xs - h.half, ys - h.half, h.join[sel].astype(np.int64)


def detect_early(h: GrowthHistory, m: float, n_horizon: int) -> list[tuple[Point, int]]:
    """All m-early sites with join index <= ``n_horizon``, with their joins.

    Empty means the early event did not occur by the horizon.  Results are
    sorted by join index.
    """
    if n_horizon > h.n:
        raise ValueError(f"horizon {n_horizon} exceeds run length {h.n}")
    xs, ys, joins = _cluster_coords(h, n_horizon)
    r = np.sqrt(xs.astype(np.float64) ** 2 + ys.astype(np.float64) ** 2)
    flagged = (r >= m) & (joins <= math.pi * (r - m) ** 2)
    hits = sorted(zip(joins[flagged], xs[flagged], ys[flagged]))
    return [((int(x), int(y)), int(j)) for j, x, y in hits]


def detect_late(h: GrowthHistory, ell: float, n_horizon: int) -> list[Point]:
    """All l-late sites within ``B_{sqrt(N/pi) - l}`` at horizon N."""
    if n_horizon > h.n:
        raise ValueError(f"horizon {n_horizon} exceeds run length {h.n}")
    r_ball = math.sqrt(n_horizon / math.pi) - ell
    if r_ball <= 0:
        return []
    half = h.half
    r2 = h.r2_grid().astype(np.float64)
    in_ball = r2 < r_ball * r_ball
    join = h.join.astype(np.float64)
    deadline = np.pi * (np.sqrt(r2) + ell) ** 2
    late = in_ball & ((h.join == 0) | (join > deadline))
    xs, ys = np.nonzero(late)
    return sorted((int(x) - half, int(y) - half) for x, y in zip(xs, ys))


def event_complement_check(h: GrowthHistory, m: float, ell: float, n_horizon: int) -> bool:
    """Verify the complement identity for both events at horizon N.

    The definition side asks whether any site is flagged by
    :func:`detect_early` / :func:`detect_late`.  The containment side asks,
    via the inner/outer radius profiles, whether the cluster stayed inside
    ``B_{sqrt(n/pi)+m}`` and covered ``B_{sqrt(n/pi)-l}`` for every real
    time n <= N (the late-side ball is largest just before the next integer
    time, hence the k+1 in the radii below).  Returns True iff the two
    sides agree on both events.
    """
    early_def = len(detect_early(h, m, n_horizon)) > 0
    late_def = len(detect_late(h, ell, n_horizon)) > 0

    inner, outer = radius_profiles(h)
    ks = np.arange(1, n_horizon + 1, dtype=np.float64)
    early_contain = bool(np.any(outer[1 : n_horizon + 1] >= np.sqrt(ks / math.pi) + m))

    radii = np.empty(n_horizon + 1)
    radii[:n_horizon] = np.sqrt(np.arange(1, n_horizon + 1, dtype=np.float64) / math.pi) - ell
    radii[n_horizon] = math.sqrt(n_horizon / math.pi) - ell
    late_contain = bool(np.any(inner[: n_horizon + 1] < radii))

    return (early_def == early_contain) and (late_def == late_contain)


def lateness_field(h: GrowthHistory) -> dict[Point, float]:
    """``L(z) = sqrt(join(z)/pi) - |z|`` for every joined site."""
    xs, ys, joins = _cluster_coords(h, h.n)
    vals = np.sqrt(joins / math.pi) - np.sqrt(xs.astype(np.float64) ** 2 + ys**2)
    return {(int(x), int(y)): float(v) for x, y, v in zip(xs, ys, vals)}


def max_abs_lateness(h: GrowthHistory) -> float:
    xs, ys, joins = _cluster_coords(h, h.n)
    vals = np.sqrt(joins / math.pi) - np.sqrt(xs.astype(np.float64) ** 2 + ys**2)
    return float(np.abs(vals).max())


def tentacle_scan(h: GrowthHistory, k: int, b: float, m: int) -> list[Point]:
    """Cluster sites whose m-ball holds at most ``b m^2`` cluster sites.

    Scans z in the cluster after k particles with ``|z| >= m`` (the ball
    around z must not contain the origin) and counts cluster sites in the
    strict Euclidean ball ``B(z, m)``; counts come from an FFT convolution
    and are rounded back to integers.
    """
    if m < 1:
        raise ValueError(f"ball radius must be >= 1, got {m}")
    occ = ((h.join > 0) & (h.join <= k)).astype(np.float64)
    d = np.arange(-m + 1, m, dtype=np.int64)
    kernel = (d[:, None] ** 2 + d[None, :] ** 2 < m * m).astype(np.float64)
    counts = np.rint(fftconvolve(occ, kernel, mode="same")).astype(np.int64)
    r2 = h.r2_grid()
    flagged = (occ > 0) & (r2 >= m * m) & (counts <= b * m * m)
    xs, ys = np.nonzero(flagged)
    return sorted((int(x) - h.half, int(y) - h.half) for x, y in zip(xs, ys))


# -- shells and towers -------------------------------------------------------


@dataclass(frozen=True)
class ShellProfile:
    """Occupancy counts of the m+1 square shells around a center, outside-in.

    ``a[j]`` counts cluster sites at Chebyshev distance ``m - j`` from the
    center, so j = 0 is the outermost shell and j = m the center itself.
    """

    center: Point
    m: int
    a: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.a)


def shell_profile(cluster, center: Point, m: int, k: int | None = None) -> ShellProfile:
    """Shell counts of a cluster around ``center``.

    ``cluster`` is a :class:`GrowthHistory` (with optional prefix ``k``) or
    an (N, 2) array / iterable of sites.
    """
    if m < 0:
        raise ValueError("shell count needs m >= 0")
    if isinstance(cluster, GrowthHistory):
        xs, ys, _ = _cluster_coords(cluster, cluster.n if k is None else k)
    else:
        pts = np.asarray(list(cluster) if not isinstance(cluster, np.ndarray) else cluster)
        pts = pts.reshape(-1, 2)
        xs, ys = pts[:, 0], pts[:, 1]
    cheb = np.maximum(np.abs(xs - center[0]), np.abs(ys - center[1]))
    counts = np.bincount(cheb[cheb <= m].astype(np.int64), minlength=m + 1)
    a = tuple(int(counts[m - j]) for j in range(m + 1))
    return ShellProfile(center=(int(center[0]), int(center[1])), m=m, a=a)


@dataclass(frozen=True)
class TowerDecomposition:
    """Greedy block decomposition of a shell profile.

    ``beta[i]`` are block side lengths summing to ``m + 1``; ``alpha`` are
    the prefix sums (block boundaries).  Every block except possibly the
    last satisfies the window condition

        c' (beta_i / 2)^d  <=  sum of a_j over the block  <=  c' beta_i^d;

    ``tail_unconstrained`` records whether the final block was emitted as a
    plain remainder without the condition.
    """

    beta: tuple[int, ...]
    alpha: tuple[int, ...]
    c_prime: float
    d: int
    a: tuple[int, ...]
    tail_unconstrained: bool

    def step_sequence(self) -> tuple[int, ...]:
        """``b_j = beta_{gamma_j}^{d-1}``: the block size over each shell."""
        out = []
        for size in self.beta:
            out.extend([size ** (self.d - 1)] * size)
        return tuple(out)

    def window_sums(self) -> tuple[int, ...]:
        return tuple(
            sum(self.a[self.alpha[i] : self.alpha[i + 1]]) for i in range(len(self.beta))
        )

    def windows_ok(self) -> bool:
        """Recheck the window condition on all constrained blocks."""
        sums = self.window_sums()
        last = len(self.beta) - 1
        for i, (size, s) in enumerate(zip(self.beta, sums)):
            if i == last and self.tail_unconstrained:
                continue
            if not (self.c_prime * (size / 2) ** self.d <= s <= self.c_prime * size**self.d):
                return False
        return True


def tower_decompose(profile, c_prime: float = 0.5, d: int = 2) -> TowerDecomposition:
    """Greedy minimal-block decomposition of shell counts.

    Blocks are chosen inductively: each ``beta_i`` is the smallest size
    whose window of shell counts satisfies the two-sided condition above;
    if no size up to the number of remaining shells works, the remainder
    becomes the final, unconstrained block.  Requires every shell count to
    be positive.
    """
    a = profile.a if isinstance(profile, ShellProfile) else tuple(int(v) for v in profile)
    if not a:
        raise ValueError("empty shell profile")
    if any(v <= 0 for v in a):
        raise NonpositiveShellError(f"shell counts must all be >= 1, got {a}")
    total = len(a)  # = m + 1 shells to cover
    beta: list[int] = []
    start = 0
    while start < total:
        remaining = total - start
        chosen = None
        acc = 0
        for size in range(1, remaining + 1):
            acc += a[start + size - 1]
            if c_prime * (size / 2) ** d <= acc <= c_prime * size**d:
                chosen = size
                break
        if chosen is None:
            beta.append(remaining)
            tail_unconstrained = True
            break
        beta.append(chosen)
        start += chosen
        tail_unconstrained = False
    alpha = tuple(itertools.accumulate([0] + beta))
    return TowerDecomposition(
        beta=tuple(beta),
        alpha=alpha,
        c_prime=c_prime,
        d=d,
        a=a,
        tail_unconstrained=tail_unconstrained,
    )


def tower_energy(decomposition, d: int | None = None) -> int:
    """``E(beta) = sum_i i * beta_i^d`` with blocks indexed from 1."""
    if isinstance(decomposition, TowerDecomposition):
        beta, d = decomposition.beta, decomposition.d
    else:
        beta = tuple(int(v) for v in decomposition)
        d = 2 if d is None else d
    return sum(i * size**d for i, size in enumerate(beta, start=1))


def min_tower_energy(m: int, d: int = 2, size_limit: int = 60) -> tuple[int, tuple[int, ...]]:
    """Exact minimum of the tower energy over compositions of ``m + 1``.

    Dynamic program over (remaining mass, block index); returns the
    minimum and one minimiser.  Guarded by ``size_limit`` since the tables
    are quadratic in m.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if m > size_limit:
        raise SizeLimitError(f"m = {m} above the exhaustive bound {size_limit}")
    mass = m + 1
    # best[i][r]: minimal energy of blocks i, i+1, ... distributing mass r
    inf = float("inf")
    best = [[0] + [inf] * mass for _ in range(mass + 2)]
    choice = [[0] * (mass + 1) for _ in range(mass + 2)]
    for i in range(mass, 0, -1):
        for r in range(1, mass + 1):
            b_best, v_best = 0, inf
            for size in range(1, r + 1):
                v = i * size**d + best[i + 1][r - size]
                if v < v_best:
                    v_best, b_best = v, size
            best[i][r] = v_best
            choice[i][r] = b_best
    out = []
    i, r = 1, mass
    while r > 0:
        size = choice[i][r]
        out.append(size)
        r -= size
        i += 1
    return int(best[1][mass]), tuple(out)
