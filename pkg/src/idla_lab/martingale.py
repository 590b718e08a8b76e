"""Stopped-particle aggregation inside the detector region, and its clock.

Particles are launched from the origin one at a time and walk on the grid
until they first reach an unoccupied lattice site inside the region (they
settle there), a boundary crossing point (they freeze, contributing the
exact boundary value of the field), or the pole vertex itself.  Summing
``H - H(0)`` over the stopped positions gives a process with zero drift;
the discrete quadratic variation ``sum (delta M)^2`` accumulated along the
embedded steps serves as its clock.

Continuous grid Brownian motion is replaced by its exact embedded
first-hit chain: from a vertex whose four edges carry absorbing points at
distances ``d_1..d_4`` (distance 1 meaning the neighbour vertex itself),
the first hit lands on edge i with probability proportional to ``1/d_i``
-- the series-resistance identity.  This reproduces every hit location in
law and discards only the continuous time parametrisation, which enters
the analysis solely through the clock.

The module also carries the closed-form Brownian facts used to calibrate
the clock: the exact exit-time moment generating function from an
interval, its quadratic upper bound, and the Gaussian bound for the
running maximum, together with Monte Carlo verifiers for each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, uint64

from ._rng import CounterRng, nb_stream_base, nb_stream_draw
from .harmonic_field import (
    DIRECTIONS,
    GridPoint,
    HarmonicPole,
    OmegaRegion,
    build_omega,
    make_pole,
)
from .lattice import Point
from .potential_kernel import KernelTable


class PoleError(ValueError):
    """The cosine in the exact exit MGF has hit its pole."""


class DomainError(ValueError):
    """Arguments outside the validity domain of the exit MGF bound."""


# -- Brownian closed forms ----------------------------------------------------


def exit_mgf_exact(a: float, b: float, lam: float) -> float:
    """``E_0 exp(lam * tau(-a, b))`` for the exit time of ``[-a, b]``.

    Centering the interval, the MGF is ``cos(sqrt(lam) x0) / cos(sqrt(lam)
    c)`` with ``c = (a+b)/2`` and start offset ``x0 = (a-b)/2``; it is
    finite only while ``sqrt(lam) c < pi/2``.

    Normalisation: this closed form solves ``f'' = -lam f``, i.e. it is
    the MGF for the diffusion with generator ``d^2/dx^2`` (variance ``2t``;
    for standard Brownian motion replace ``lam`` by ``2 lam``).  Under this
    convention the cosine pole sits at ``sqrt(lam)(a+b) = pi``, safely
    outside the quadratic bound's domain ``sqrt(lam)(a+b) <= 3``.
    :func:`mc_exit_mgf` discretises the matching diffusion.
    """
    if a <= 0 or b <= 0:
        raise ValueError("interval endpoints must be positive")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    c = 0.5 * (a + b)
    x0 = 0.5 * (a - b)
    root = math.sqrt(lam)
    if root * c >= math.pi / 2:
        raise PoleError(f"sqrt(lam) * (a+b)/2 = {root * c:.6g} >= pi/2")
    return math.cos(root * x0) / math.cos(root * c)


def exit_mgf_bound(a: float, b: float, lam: float) -> float:
    """The quadratic bound ``1 + 10 lam a b``, valid for ``sqrt(lam)(a+b) <= 3``."""
    if not 0 < a <= b:
        raise ValueError(f"need 0 < a <= b, got a={a}, b={b}")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if math.sqrt(lam) * (a + b) > 3.0:
        raise DomainError(f"sqrt(lam)*(a+b) = {math.sqrt(lam) * (a + b):.6g} > 3")
    return 1.0 + 10.0 * lam * a * b


def bm_sup_tail(k: float, s: float) -> float:
    """Gaussian bound ``exp(-k^2 s / 2)`` for ``P(sup_[0,s] B >= k s)``."""
    if k <= 0 or s <= 0:
        raise ValueError("k and s must be positive")
    return math.exp(-0.5 * k * k * s)


def mc_exit_mgf(
    a: float,
    b: float,
    lam: float,
    n_paths: int = 10**6,
    dt: float = 5e-5,
    seed: int = 0,
    chunk: int = 1 << 16,
) -> tuple[float, float]:
    """Monte Carlo estimate of the exit-time MGF from discretised paths.

    Simulates the variance-``2t`` diffusion matching
    :func:`exit_mgf_exact` and returns ``(estimate, standard_error)``.
    The discretisation bias is O(sqrt(dt)) upward (crossings between grid
    times are missed).
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    sq = math.sqrt(2.0 * dt)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_paths:
        c = min(chunk, n_paths - done)
        done += c
        pos = np.zeros(c)
        steps = 0
        while pos.size:
            steps += 1
            pos += rng.standard_normal(pos.size) * sq
            exited = (pos <= -a) | (pos >= b)
            n_exit = int(exited.sum())
            if n_exit:
                w = math.exp(lam * steps * dt)
                total += n_exit * w
                total_sq += n_exit * w * w
                pos = pos[~exited]
    mean = total / n_paths
    var = max(total_sq / n_paths - mean * mean, 0.0)
    return mean, math.sqrt(var / n_paths)


def mc_sup_tail(
    k: float,
    s: float,
    n_paths: int = 10**5,
    n_steps: int = 10**4,
    seed: int = 0,
    chunk: int = 1 << 15,
) -> float:
    """Empirical ``P(sup_[0,s] B >= k s)`` from discretised paths."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    sq = math.sqrt(s / n_steps)
    level = k * s
    hits = 0
    done = 0
    while done < n_paths:
        c = min(chunk, n_paths - done)
        done += c
        pos = np.zeros(c)
        sup = np.zeros(c)
        for _ in range(n_steps):
            pos += rng.standard_normal(c) * sq
            np.maximum(sup, pos, out=sup)
        hits += int((sup >= level).sum())
    return hits / n_paths


# -- the embedded first-hit step ----------------------------------------------


def split_step(marks, u: float) -> tuple[int, bool]:
    """One grid-excursion step from a vertex with marked edges.

    ``marks`` are the four distances ``d_i`` in (0, 1] to the nearest
    special point along each edge (1 means the neighbour vertex itself);
    ``u`` is a uniform variate in [0, 1).  Returns ``(edge index,
    absorbed)`` where the edge is chosen with probability proportional to
    ``1/d_i`` -- the exact first-hit law of grid Brownian motion onto the
    four marks -- and ``absorbed`` is True when the chosen mark is an edge
    interior point (``d_i < 1``).
    """
    weights = []
    for d in marks:
        if not 0.0 < d <= 1.0:
            raise ValueError(f"mark distance out of (0, 1]: {d}")
        weights.append(1.0 / d)
    total = weights[0] + weights[1] + weights[2] + weights[3]
    t = u * total
    acc = 0.0
    for i in range(4):
        acc += weights[i]
        if t < acc:
            return i, marks[i] < 1.0
    return 3, marks[3] < 1.0


def sample_split_step(marks, rng: CounterRng) -> tuple[int, bool]:
    return split_step(marks, rng.next_unit())


# -- stopped-particle process --------------------------------------------------

SETTLED, FROZEN, POLE = 0, 1, 2
_KIND_NAMES = ("settled", "frozen", "pole")

# edge kinds on the walk grid
_EDGE_PLAIN, _EDGE_MARK, _EDGE_POLE = 0, 1, 2


@dataclass(frozen=True)
class ParticleRecord:
    """Outcome of one launched particle."""

    kind: str
    point: GridPoint
    delta_m: float
    delta_s: float
    steps: int
    h_min: float
    h_max: float


class StoppedCluster:
    """Mutable state of the stopped aggregation for one pole.

    ``occupied`` are the settled lattice sites (a subset of the region's
    inside vertices); ``frozen`` is the multiset of boundary grid points
    holding stopped particles, in launch order; ``absorbed_at_pole`` counts
    particles that reached the pole vertex.
    """

    def __init__(self, pole: HarmonicPole, omega: OmegaRegion):
        self.pole = pole
        self.omega = omega
        self.occupied: set[Point] = set()
        self.frozen: list[GridPoint] = []
        self.absorbed_at_pole = 0
        self.h0 = float(omega.h[omega.half, omega.half])
        self._marks = _edge_marks(omega)

    @property
    def launched(self) -> int:
        return len(self.occupied) + len(self.frozen) + self.absorbed_at_pole


def _edge_marks(omega: OmegaRegion):
    """Dense (frac, kind) edge tables for the walk over the region box."""
    side = 2 * omega.half + 1
    frac = np.ones((4, side, side), dtype=np.float64)
    kind = np.zeros((4, side, side), dtype=np.uint8)
    for (u, d), f in omega.crossings.items():
        i = DIRECTIONS.index(d)
        ix, iy = u[0] + omega.half, u[1] + omega.half
        frac[i, ix, iy] = f
        kind[i, ix, iy] = _EDGE_POLE if omega.is_puncture_edge(u, d) else _EDGE_MARK
    has_mark = (kind != 0).any(axis=0)
    return frac, kind, has_mark


def run_stopped_particle(cluster: StoppedCluster, table: KernelTable, rng: CounterRng) -> ParticleRecord:
    """Launch one particle from the origin; reference (pure Python) walker.

    Mutates ``cluster``.  The numba trace kernel consumes the same random
    stream and performs the identical arithmetic, so the two paths agree
    bit for bit; this implementation is the readable reference.
    """
    omega = cluster.omega
    half = omega.half
    h = omega.h
    frac, kind, has_mark = cluster._marks
    h_pole = float(h[omega.pole.zeta[0] + half, omega.pole.zeta[1] + half])
    thr = omega.threshold
    h0 = cluster.h0

    x, y = half, half
    if (0, 0) not in cluster.occupied:
        cluster.occupied.add((0, 0))
        v = float(h[x, y])
        return ParticleRecord("settled", GridPoint((0, 0)), v - h0, 0.0, 0, v, v)

    delta_s = 0.0
    steps = 0
    h_here = float(h[x, y])
    h_min = h_max = h_here
    while True:
        if has_mark[x, y]:
            marks = [float(frac[i, x, y]) for i in range(4)]
            i, _ = split_step(marks, rng.next_unit())
        else:
            i = rng.next_direction()
        steps += 1
        ek = int(kind[i, x, y])
        f = float(frac[i, x, y])
        if ek == _EDGE_MARK:
            delta_s += (thr - h_here) * (thr - h_here)
            h_min, h_max = min(h_min, thr), max(h_max, thr)
            point = GridPoint((x - half, y - half), DIRECTIONS[i], f)
            cluster.frozen.append(point)
            return ParticleRecord("frozen", point, thr - h0, delta_s, steps, h_min, h_max)
        if ek == _EDGE_POLE:
            delta_s += (h_pole - h_here) * (h_pole - h_here)
            h_min, h_max = min(h_min, h_pole), max(h_max, h_pole)
            cluster.absorbed_at_pole += 1
            return ParticleRecord(
                "pole", GridPoint(omega.pole.zeta), h_pole - h0, delta_s, steps, h_min, h_max
            )
        dx, dy = DIRECTIONS[i]
        nx, ny = x + dx, y + dy
        h_next = float(h[nx, ny])
        delta_s += (h_next - h_here) * (h_next - h_here)
        h_min, h_max = min(h_min, h_next), max(h_max, h_next)
        z = (nx - half, ny - half)
        if z not in cluster.occupied:
            assert omega.mask[nx, ny], "walker reached an unoccupied vertex outside the region"
            cluster.occupied.add(z)
            return ParticleRecord("settled", GridPoint(z), h_next - h0, delta_s, steps, h_min, h_max)
        x, y = nx, ny
        h_here = h_next


@njit(cache=True)
def _trace_core(n, seed, half, hvals, frac, ekind, has_mark, zx, zy, h_pole, thr, h0):
    side = 2 * half + 1
    occ = np.zeros((side, side), dtype=np.uint8)
    kinds = np.empty(n, dtype=np.uint8)
    ex = np.empty(n, dtype=np.int32)
    ey = np.empty(n, dtype=np.int32)
    edir = np.empty(n, dtype=np.int8)
    efrac = np.empty(n, dtype=np.float64)
    dm = np.empty(n, dtype=np.float64)
    ds = np.empty(n, dtype=np.float64)
    steps = np.empty(n, dtype=np.uint64)
    hmin = np.empty(n, dtype=np.float64)
    hmax = np.empty(n, dtype=np.float64)

    for k in range(1, n + 1):
        base = nb_stream_base(uint64(seed), uint64(k))
        counter = uint64(0)
        bits = uint64(0)
        nbits = 0
        x = half
        y = half
        if occ[x, y] == 0:
            occ[x, y] = 1
            v = hvals[x, y]
            kinds[k - 1] = 0
            ex[k - 1] = 0
            ey[k - 1] = 0
            edir[k - 1] = -1
            efrac[k - 1] = 0.0
            dm[k - 1] = v - h0
            ds[k - 1] = 0.0
            steps[k - 1] = 0
            hmin[k - 1] = v
            hmax[k - 1] = v
            continue
        d_s = 0.0
        n_steps = uint64(0)
        h_here = hvals[x, y]
        h_lo = h_here
        h_hi = h_here
        while True:
            if has_mark[x, y] != 0:
                w0 = 1.0 / frac[0, x, y]
                w1 = 1.0 / frac[1, x, y]
                w2 = 1.0 / frac[2, x, y]
                w3 = 1.0 / frac[3, x, y]
                u = (nb_stream_draw(base, counter) >> uint64(11)) * 1.1102230246251565e-16
                counter += uint64(1)
                t = u * (w0 + w1 + w2 + w3)
                if t < w0:
                    i = 0
                elif t < w0 + w1:
                    i = 1
                elif t < w0 + w1 + w2:
                    i = 2
                else:
                    i = 3
            else:
                if nbits == 0:
                    bits = nb_stream_draw(base, counter)
                    counter += uint64(1)
                    nbits = 32
                b2 = bits & uint64(3)
                bits >>= uint64(2)
                nbits -= 1
                if b2 == uint64(0):
                    i = 0
                elif b2 == uint64(1):
                    i = 1
                elif b2 == uint64(2):
                    i = 2
                else:
                    i = 3
            n_steps += uint64(1)
            ek = ekind[i, x, y]
            if ek == 1:
                d_s += (thr - h_here) * (thr - h_here)
                if thr < h_lo:
                    h_lo = thr
                if thr > h_hi:
                    h_hi = thr
                kinds[k - 1] = 1
                ex[k - 1] = x - half
                ey[k - 1] = y - half
                edir[k - 1] = i
                efrac[k - 1] = frac[i, x, y]
                dm[k - 1] = thr - h0
                ds[k - 1] = d_s
                steps[k - 1] = n_steps
                hmin[k - 1] = h_lo
                hmax[k - 1] = h_hi
                break
            if ek == 2:
                d_s += (h_pole - h_here) * (h_pole - h_here)
                if h_pole < h_lo:
                    h_lo = h_pole
                if h_pole > h_hi:
                    h_hi = h_pole
                kinds[k - 1] = 2
                ex[k - 1] = zx
                ey[k - 1] = zy
                edir[k - 1] = -1
                efrac[k - 1] = 0.0
                dm[k - 1] = h_pole - h0
                ds[k - 1] = d_s
                steps[k - 1] = n_steps
                hmin[k - 1] = h_lo
                hmax[k - 1] = h_hi
                break
            if i == 0:
                nx = x + 1
                ny = y
            elif i == 1:
                nx = x - 1
                ny = y
            elif i == 2:
                nx = x
                ny = y + 1
            else:
                nx = x
                ny = y - 1
            h_next = hvals[nx, ny]
            d_s += (h_next - h_here) * (h_next - h_here)
            if h_next < h_lo:
                h_lo = h_next
            if h_next > h_hi:
                h_hi = h_next
            if occ[nx, ny] == 0:
                occ[nx, ny] = 1
                kinds[k - 1] = 0
                ex[k - 1] = nx - half
                ey[k - 1] = ny - half
                edir[k - 1] = -1
                efrac[k - 1] = 0.0
                dm[k - 1] = h_next - h0
                ds[k - 1] = d_s
                steps[k - 1] = n_steps
                hmin[k - 1] = h_lo
                hmax[k - 1] = h_hi
                break
            x = nx
            y = ny
            h_here = h_next
    return occ, kinds, ex, ey, edir, efrac, dm, ds, steps, hmin, hmax


class MartingaleTrace:
    """Per-particle exits and the cumulative process/clock series.

    ``m[k]`` and ``s[k]`` are the process value and accumulated discrete
    quadratic variation after k particles, with ``m[0] = s[0] = 0``.
    """

    def __init__(self, pole, omega, seed, kinds, ex, ey, edir, efrac, dm, ds, steps, hmin, hmax):
        self.pole = pole
        self.omega = omega
        self.seed = seed
        self.n = len(kinds)
        self.kinds = kinds
        self.exit_x = ex
        self.exit_y = ey
        self.exit_dir = edir
        self.exit_frac = efrac
        self.delta_m = dm
        self.delta_s = ds
        self.steps = steps
        self.h_min = hmin
        self.h_max = hmax
        self.h0 = float(omega.h[omega.half, omega.half])
        self.m = np.concatenate([[0.0], np.cumsum(dm)])
        self.s = np.concatenate([[0.0], np.cumsum(ds)])

    @property
    def settled_count(self) -> int:
        return int((self.kinds == SETTLED).sum())

    @property
    def frozen_count(self) -> int:
        return int((self.kinds == FROZEN).sum())

    @property
    def pole_count(self) -> int:
        return int((self.kinds == POLE).sum())

    def exit_point(self, k: int) -> GridPoint:
        """Exit grid point of particle k (1-based)."""
        i = k - 1
        base = (int(self.exit_x[i]), int(self.exit_y[i]))
        if self.exit_dir[i] < 0:
            return GridPoint(base)
        return GridPoint(base, DIRECTIONS[int(self.exit_dir[i])], float(self.exit_frac[i]))

    def records(self) -> list[ParticleRecord]:
        return [
            ParticleRecord(
                _KIND_NAMES[int(self.kinds[i])],
                self.exit_point(i + 1),
                float(self.delta_m[i]),
                float(self.delta_s[i]),
                int(self.steps[i]),
                float(self.h_min[i]),
                float(self.h_max[i]),
            )
            for i in range(self.n)
        ]

    def cluster(self) -> StoppedCluster:
        """Final aggregation state, rebuilt from the records."""
        out = StoppedCluster(self.pole, self.omega)
        for rec in self.records():
            if rec.kind == "settled":
                out.occupied.add(rec.point.base)
            elif rec.kind == "frozen":
                out.frozen.append(rec.point)
            else:
                out.absorbed_at_pole += 1
        return out

    def to_csv(self, path) -> None:
        """Export ``k,exit_kind,x,y,frac,delta_M,delta_S,M,S`` rows."""
        with open(path, "w") as fh:
            fh.write("k,exit_kind,x,y,frac,delta_M,delta_S,M,S\n")
            for i in range(self.n):
                fh.write(
                    f"{i + 1},{_KIND_NAMES[int(self.kinds[i])]},"
                    f"{int(self.exit_x[i])},{int(self.exit_y[i])},{float(self.exit_frac[i])!r},"
                    f"{float(self.delta_m[i])!r},{float(self.delta_s[i])!r},"
                    f"{float(self.m[i + 1])!r},{float(self.s[i + 1])!r}\n"
                )


def martingale_trace(
    zeta: Point,
    n: int,
    seed: int,
    table: KernelTable,
    omega: OmegaRegion | None = None,
) -> MartingaleTrace:
    """Launch n stopped particles toward the pole at ``zeta``.

    Deterministic in ``(zeta, n, seed)`` for a given table.  A prebuilt
    region for the same pole may be passed to amortise construction across
    seeds.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    pole = make_pole(zeta)
    if omega is None:
        omega = build_omega(pole, table)
    half = omega.half
    frac, ekind, has_mark = _edge_marks(omega)
    h_pole = float(omega.h[pole.zeta[0] + half, pole.zeta[1] + half])
    h0 = float(omega.h[half, half])
    _, kinds, ex, ey, edir, efrac, dm, ds, steps, hmin, hmax = _trace_core(
        n,
        np.uint64(seed),
        half,
        omega.h,
        frac,
        ekind,
        has_mark.astype(np.uint8),
        pole.zeta[0],
        pole.zeta[1],
        h_pole,
        omega.threshold,
        h0,
    )
    return MartingaleTrace(pole, omega, seed, kinds, ex, ey, edir, efrac, dm, ds, steps, hmin, hmax)
