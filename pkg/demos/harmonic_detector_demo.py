"""The detector field around a target point and its disk-like region.

For a pole at zeta the field behaves like Re((zeta/|zeta|)/(zeta - z)):
value ~ 1/rho at the origin, between 1 and 2 at zeta itself, negative just
beyond it, and equal to 1/(2 rho) on the region boundary.  The region
traps the origin's super-level component; particles of the stopped
process freeze on its fractional edge crossings.
"""

import math
from fractions import Fraction

from idla_lab import build_kernel_table, build_omega, f_zeta, h_zeta, make_pole, mean_value_sum
from idla_lab.harmonic_field import GridPoint, h_vertex

table = build_kernel_table(128)

zeta = (40, 9)
pole = make_pole(zeta)
print(f"pole at {zeta}: rho = {pole.rho:.4f}, alpha1 = {pole.alpha1:.4f}, alpha2 = {pole.alpha2:.4f}")
print(f"  continuum field at origin: {f_zeta(zeta, 0j):.6f}  (1/rho = {1/pole.rho:.6f})")
print(f"  discrete field at origin:  {h_vertex(pole, table, (0, 0)):.6f}")
print(f"  value at the pole: {h_vertex(pole, table, zeta):.6f} (always in [1, 2])")
sx, sy = pole.sector_zeta
print(f"  just beyond the pole: {h_vertex(pole, table, (sx + 1, sy)):.4f}, "
      f"{h_vertex(pole, table, (sx + 1, sy + 1)):.4f} (negative)")

omega = build_omega(pole, table)
print(f"\nregion of {zeta}: {omega.count} inside vertices "
      f"(disk area pi rho^2 = {math.pi * pole.rho ** 2:.0f})")
print(f"  boundary crossings: {len(omega.crossings)}, "
      f"puncture edges: {sum(omega.is_puncture_edge(u, d) for u, d in omega.crossings)}")

(u, d), frac = next(iter(sorted(omega.crossings.items())))
val = h_zeta(pole, table, GridPoint(u, d, frac))
print(f"  example crossing {u} -> {d} at frac {frac:.4f}: H = {val:.10f} "
      f"(threshold 1/(2 rho) = {pole.threshold:.10f})")

print("\nmean-value sums over balls (bounded by C log rho):")
rho2 = zeta[0] ** 2 + zeta[1] ** 2
for num, den in ((1, 4), (1, 2), (3, 4), (1, 1)):
    s = mean_value_sum(pole, table, Fraction(rho2 * num * num, den * den))
    print(f"  r = {num}/{den} rho: sum = {s:+.4f}")
print(f"  over the region itself: {mean_value_sum(pole, table, omega):+.4f} "
      f"(5 log rho = {5 * math.log(pole.rho):.1f})")
