"""Square shells around a point and the greedy tower decomposition.

A thin tentacle reaching a point z must thread every square shell around
z, so the shell occupancy counts control how many boundary-crossing
"trials" the growth needed.  Grouping shells into minimal blocks whose
counts fit a two-sided window turns the counts into a tower of squares
whose energy sum i * beta_i^2 lower-bounds the trial count; minimising
the energy over all block choices shows it cannot drop below order
m^2 / log m.
"""

import math

from idla_lab import min_tower_energy, shell_profile, tower_decompose, tower_energy
from idla_lab.events import EXAMPLE_SHELL_COUNTS, example_shell_cluster

cluster = example_shell_cluster()
prof = shell_profile(cluster, (0, 0), 12)
print(f"worked example: shell counts (outermost first) = {prof.a}")
assert prof.a == EXAMPLE_SHELL_COUNTS

decomp = tower_decompose(prof, c_prime=0.5, d=2)
print(f"greedy blocks beta = {decomp.beta} (sum {sum(decomp.beta)} = m + 1)")
print(f"block windows (sums of counts): {decomp.window_sums()}")
print(f"step sequence b_j = {decomp.step_sequence()}")
print(f"tower energy sum i * beta_i^2 = {tower_energy(decomp)}")
print(f"final block unconstrained: {decomp.tail_unconstrained}")

best, minimiser = min_tower_energy(12)
print(f"\nexact minimum over all block compositions of 13: {best} via {minimiser}")

print("\nminimal energy scaled by log m / m^2 (bounded away from 0):")
print(f"  {'m':>3} {'min E':>6} {'E log m / m^2':>14}")
for m in (10, 16, 24, 32, 40):
    e, _ = min_tower_energy(m)
    print(f"  {m:3d} {e:6d} {e * math.log(m) / m**2:14.3f}")
