"""The discrete harmonic detector with a pole near a target lattice point.

For a target ``zeta != 0`` with ``rho = |zeta|``, the field is built from
three shifted copies of the potential kernel.  With ``zeta`` mapped into
the octant ``{0 <= y <= x}`` and written as
``zeta/rho = alpha1 + alpha2*(1+i)``,

    H(z) = (pi/2) [ alpha1 g(z - zeta - 1) + alpha2 g(z - zeta - 1 - i)
                    - (alpha1 + alpha2) g(z - zeta) ].

H is discrete harmonic everywhere except at the three points ``zeta``,
``zeta + 1`` and ``zeta + 1 + i`` (octant coordinates); it approximates the
continuum field ``F(z) = Re((zeta/|zeta|)/(zeta - z))``, and its
``1/(2 rho)`` super-level component around the origin is a disk-like
region whose grid boundary carries the exact value ``1/(2 rho)``
everywhere except at the puncture ``zeta`` itself.  Values for general
``zeta`` are defined by dihedral covariance, ``H_zeta(z) = H_{phi
zeta}(phi z)``.

The field extends linearly along grid edges; :class:`GridPoint` names a
point in the interior of an edge by its base vertex, a direction, and a
fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import ndimage

from .lattice import DIHEDRAL, Point, ball_points, sector_reduce
from .potential_kernel import KernelTable

HALF_PI = math.pi / 2.0

#: Edge directions in the fixed order used across the package.
DIRECTIONS: tuple[Point, ...] = ((1, 0), (-1, 0), (0, 1), (0, -1))


class OriginOutsideError(ValueError):
    """The origin is not in the super-level region (pathological pole)."""

    def __init__(self, rho: float, h0: float, threshold: float):
        self.rho = rho
        super().__init__(
            f"origin outside region: H(0) = {h0:.6g} <= 1/(2 rho) = {threshold:.6g} at rho = {rho:.6g}"
        )


@dataclass(frozen=True)
class HarmonicPole:
    """A target point with its octant reduction and kernel coefficients.

    Satisfies ``(alpha1 + alpha2)^2 + alpha2^2 = 1`` and
    ``0 <= alpha1, alpha2 <= 1``.
    """

    zeta: Point
    rho: float
    alpha1: float
    alpha2: float
    sector_zeta: Point
    map_index: int

    @property
    def threshold(self) -> float:
        """The boundary level 1/(2 rho)."""
        return 1.0 / (2.0 * self.rho)


@dataclass(frozen=True)
class GridPoint:
    """A point of the grid: a vertex, or an interior point of an edge.

    ``frac == 0`` iff ``direction is None`` (the vertex itself); otherwise
    the point lies ``frac`` of the way from ``base`` toward the neighbour.
    """

    base: Point
    direction: Point | None = None
    frac: float = 0.0

    def __post_init__(self):
        if (self.direction is None) != (self.frac == 0.0):
            raise ValueError("frac must be 0 exactly for a vertex and nonzero on an edge")
        if not 0.0 <= self.frac <= 1.0:
            raise ValueError(f"frac out of range: {self.frac}")


def make_pole(zeta: Point) -> HarmonicPole:
    """Build the pole data for a target ``zeta != 0``."""
    zeta = (int(zeta[0]), int(zeta[1]))
    if zeta == (0, 0):
        raise ValueError("the pole must not be the origin")
    (sx, sy), idx = sector_reduce(zeta)
    rho = math.hypot(sx, sy)
    return HarmonicPole(
        zeta=zeta,
        rho=rho,
        alpha1=(sx - sy) / rho,
        alpha2=sy / rho,
        sector_zeta=(sx, sy),
        map_index=idx,
    )


def f_zeta(zeta: Point, z: complex) -> float:
    """Continuum field ``Re((zeta/|zeta|)/(zeta - z))``; rejects ``z == zeta``."""
    zc = complex(zeta[0], zeta[1])
    z = complex(z)
    if z == zc:
        raise ValueError("z coincides with the pole")
    return ((zc / abs(zc)) / (zc - z)).real


def h_grid(pole: HarmonicPole, table: KernelTable, x, y) -> np.ndarray:
    """Vectorised H at lattice vertices given as integer arrays."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    a, b, c, d = DIHEDRAL[pole.map_index]
    sx, sy = pole.sector_zeta
    u = a * x + b * y - sx
    v = c * x + d * y - sy
    g0 = table.eval_many(u, v)
    g1 = table.eval_many(u - 1, v)
    g2 = table.eval_many(u - 1, v - 1)
    return HALF_PI * (pole.alpha1 * g1 + pole.alpha2 * g2 - (pole.alpha1 + pole.alpha2) * g0)


def h_vertex(pole: HarmonicPole, table: KernelTable, z: Point) -> float:
    """H at a single lattice vertex."""
    return float(h_grid(pole, table, np.int64(z[0]), np.int64(z[1])))


def h_zeta(pole: HarmonicPole, table: KernelTable, z) -> float:
    """H at a vertex ``(x, y)`` or at a :class:`GridPoint` (edge interior).

    Edge-interior values interpolate the two endpoint values linearly, per
    the linear extension of the field along grid edges.
    """
    if isinstance(z, GridPoint):
        h0 = h_vertex(pole, table, z.base)
        if z.direction is None:
            return h0
        w = (z.base[0] + z.direction[0], z.base[1] + z.direction[1])
        return (1.0 - z.frac) * h0 + z.frac * h_vertex(pole, table, w)
    return h_vertex(pole, table, z)


class OmegaRegion:
    """The grid component of the origin where H exceeds ``1/(2 rho)``.

    ``inside`` is the set of lattice vertices of the component;
    ``crossings`` maps each directed edge (inside vertex, direction) that
    leaves the region to the fraction along the edge where H equals the
    threshold exactly.  Edges that terminate at the pole carry ``frac = 1``
    and are flagged as the puncture.
    """

    def __init__(self, pole, threshold, half, mask, h, origin_index):
        self.pole = pole
        self.threshold = threshold
        self.half = half
        self.mask = mask  # bool (side, side), True = inside vertex
        self.h = h  # float64 (side, side), H at every box vertex
        self._origin = origin_index
        self._crossings: dict[tuple[Point, Point], float] | None = None
        self._inside: set[Point] | None = None

    @property
    def puncture(self) -> Point:
        return self.pole.zeta

    def index(self, z: Point) -> tuple[int, int]:
        return (z[0] + self.half, z[1] + self.half)

    def r2_grid(self) -> np.ndarray:
        """Squared distance to the origin for every box vertex."""
        c = np.arange(-self.half, self.half + 1, dtype=np.int64)
        return c[:, None] ** 2 + c[None, :] ** 2

    def contains(self, z: Point) -> bool:
        ix, iy = z[0] + self.half, z[1] + self.half
        side = 2 * self.half + 1
        if not (0 <= ix < side and 0 <= iy < side):
            return False
        return bool(self.mask[ix, iy])

    @property
    def inside(self) -> set[Point]:
        if self._inside is None:
            xs, ys = np.nonzero(self.mask)
            self._inside = {(int(x) - self.half, int(y) - self.half) for x, y in zip(xs, ys)}
        return self._inside

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def crossings(self) -> dict[tuple[Point, Point], float]:
        if self._crossings is None:
            self._crossings = self._find_crossings()
        return self._crossings

    def _find_crossings(self) -> dict[tuple[Point, Point], float]:
        out: dict[tuple[Point, Point], float] = {}
        zeta = self.pole.zeta
        thr = self.threshold
        h = self.h
        half = self.half
        xs, ys = np.nonzero(self.mask)
        side = 2 * half + 1
        for ix, iy in zip(xs, ys):
            hu = h[ix, iy]
            for dx, dy in DIRECTIONS:
                jx, jy = ix + dx, iy + dy
                if 0 <= jx < side and 0 <= jy < side and self.mask[jx, jy]:
                    continue
                u = (int(ix) - half, int(iy) - half)
                w = (u[0] + dx, u[1] + dy)
                if w == zeta:
                    out[(u, (dx, dy))] = 1.0
                else:
                    hw = h[jx, jy]
                    frac = (hu - thr) / (hu - hw)
                    out[(u, (dx, dy))] = min(frac, 1.0)
        return out

    def is_puncture_edge(self, u: Point, direction: Point) -> bool:
        return (u[0] + direction[0], u[1] + direction[1]) == self.pole.zeta

    def boundary_points(self) -> list[GridPoint]:
        """The crossing points as grid points (puncture edges end at zeta)."""
        return [GridPoint(u, d, f) for (u, d), f in sorted(self.crossings.items())]

    def dump(self, path) -> None:
        """Text dump: ``x y`` per inside vertex, then ``x y dir frac`` per crossing."""
        names = {(1, 0): "+x", (-1, 0): "-x", (0, 1): "+y", (0, -1): "-y"}
        with open(path, "w") as fh:
            for x, y in sorted(self.inside):
                fh.write(f"{x} {y}\n")
            for (u, d), frac in sorted(self.crossings.items()):
                fh.write(f"{u[0]} {u[1]} {names[d]} {frac!r}\n")


def build_omega(pole: HarmonicPole, table: KernelTable, margin: int = 8) -> OmegaRegion:
    """Flood-fill the component of the origin in ``{H > 1/(2 rho)} - {zeta}``.

    A vertex flood fill is exact here: H is linear on edges, so an edge
    between two super-level vertices lies entirely in the super-level set,
    and no grid path can sneak through the excluded pole vertex.
    """
    thr = pole.threshold
    half = int(math.ceil(pole.rho)) + margin
    side = 2 * half + 1
    coords = np.arange(-half, half + 1, dtype=np.int64)
    gx, gy = np.meshgrid(coords, coords, indexing="ij")
    h = h_grid(pole, table, gx, gy)

    h0 = h[half, half]
    if not h0 > thr:
        raise OriginOutsideError(pole.rho, h0, thr)

    mask = h > thr
    zi = pole.zeta[0] + half, pole.zeta[1] + half
    if 0 <= zi[0] < side and 0 <= zi[1] < side:
        mask[zi] = False

    labels, _ = ndimage.label(mask, structure=[[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    region = labels == labels[half, half]
    edge_touch = region[0, :].any() or region[-1, :].any() or region[:, 0].any() or region[:, -1].any()
    if edge_touch:
        raise RuntimeError("region reached the bounding box; enlarge margin")
    return OmegaRegion(pole, thr, half, region, h, (half, half))


def mean_value_sum(pole: HarmonicPole, table: KernelTable, region) -> float:
    """Sum of ``H(z) - H(0)`` over lattice points of a region.

    ``region`` is either an :class:`OmegaRegion` or a ball given by its
    squared radius (``int``/``Fraction``; a float radius squared is
    converted exactly).  The ball variant requires ``r <= rho``.
    """
    h0 = h_vertex(pole, table, (0, 0))
    if isinstance(region, OmegaRegion):
        return float((region.h[region.mask] - h0).sum())
    r2 = Fraction(region) if isinstance(region, float) else region
    rho2 = pole.sector_zeta[0] ** 2 + pole.sector_zeta[1] ** 2
    if r2 > rho2:
        raise ValueError(f"ball radius^2 {r2} exceeds rho^2 = {rho2}")
    pts = ball_points(r2)
    if pts.size == 0:
        return 0.0
    vals = h_grid(pole, table, pts[:, 0], pts[:, 1])
    return float((vals - h0).sum())
