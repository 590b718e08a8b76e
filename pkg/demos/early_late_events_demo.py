"""Early/late events, the complement identity, and thin-tentacle scans.

A site is m-early if it joined while still m outside the disk of the
current area, and l-late if it is still missing once the disk has passed
it by l.  "No early point" is the same event as "the cluster stayed
inside the inflated disk at every time", and dually for late points;
both routes are computed independently here and must agree exactly.
"""

import numpy as np

from idla_lab import (
    event_complement_check,
    detect_early,
    detect_late,
    idla_grow,
    tentacle_scan,
)

h = idla_grow(20_000, 7)

print("threshold sweep on one n = 20000 cluster:")
print(f"  {'m=ell':>6} {'early':>6} {'late':>6} {'identity':>9}")
for thr in (1.0, 2.0, 3.0, 4.0, 6.0, 8.0):
    early = len(detect_early(h, thr, h.n))
    late = len(detect_late(h, thr, h.n))
    ok = event_complement_check(h, thr, thr, h.n)
    print(f"  {thr:6.1f} {early:6d} {late:6d} {str(ok):>9}")

print("\nfirst few early sites (point, join index):")
for (z, j) in detect_early(h, 3.0, h.n)[:5]:
    print(f"  {z} joined as particle {j}")

print("\nthin tentacles: sites whose m-ball holds at most b m^2 cluster sites")
for b in (0.05, 0.1, 0.2):
    flags = tentacle_scan(h, h.n, b, 12)
    print(f"  b = {b}: {len(flags)} flagged (m = 12)")
print("(a healthy cluster has none; a bare path of sites would trip it)")

path_sites = [((i, 0), i + 1) for i in range(40)]
half = 50
join = np.zeros((2 * half + 1, 2 * half + 1), dtype=np.uint32)
for (x, y), j in path_sites:
    join[x + half, y + half] = j
from idla_lab import GrowthHistory

path = GrowthHistory(n=len(path_sites), seed=0, half=half, join=join)
print(f"synthetic 40-site path, b = 0.5, m = 10: {len(tentacle_scan(path, path.n, 0.5, 10))} flagged")
