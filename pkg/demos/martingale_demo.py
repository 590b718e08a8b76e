"""The stopped-particle process: zero drift and a logarithmic clock.

Particles walk from the origin and stop on settling inside the detector
region, freezing on its boundary (where the field takes the exact value
1/(2 rho)), or hitting the pole.  Summing field differences over the
stopped positions gives a zero-drift process; its accumulated squared
increments form the clock that calibrates how big a fluctuation can be.

Also exercises the closed-form Brownian facts behind the calibration:
the interval exit-time MGF against its quadratic bound and a Monte Carlo
check, and the Gaussian bound for the running maximum.
"""

import math

import numpy as np

from idla_lab import (
    bm_sup_tail,
    build_kernel_table,
    build_omega,
    exit_mgf_bound,
    exit_mgf_exact,
    make_pole,
    martingale_trace,
)
from idla_lab.martingale import mc_exit_mgf, mc_sup_tail

table = build_kernel_table(80)
zeta = (30, 7)
pole = make_pole(zeta)
omega = build_omega(pole, table)
n = int(math.pi * (pole.rho - 2) ** 2)

tr = martingale_trace(zeta, n, 1, table, omega=omega)
print(f"one trace at zeta={zeta}, n={n}:")
print(f"  settled {tr.settled_count}, frozen {tr.frozen_count}, pole hits {tr.pole_count}")
print(f"  M(n) = {tr.m[-1]:+.4f}, clock S(n) = {tr.s[-1]:.4f}, "
      f"S(n)/log n = {tr.s[-1] / math.log(n):.3f}")

trials = 400
finals = np.empty(trials)
clocks = np.empty(trials)
for seed in range(trials):
    t = martingale_trace(zeta, n, seed, table, omega=omega)
    finals[seed] = t.m[-1]
    clocks[seed] = t.s[-1]
se = finals.std(ddof=1) / math.sqrt(trials)
print(f"\nacross {trials} seeds: mean M(n) = {finals.mean():+.5f} +- {se:.5f} "
      f"(|mean|/SE = {abs(finals.mean()) / se:.2f})")
print(f"mean clock S(n) = {clocks.mean():.4f}; mean M(n)^2 = {(finals ** 2).mean():.4f} "
      "(the clock is calibrated to the square)")

print("\ninterval exit-time MGF (closed form vs bound vs Monte Carlo):")
for a, b, lam in ((0.5, 0.5, 1.0), (0.5, 1.5, 0.25), (0.2, 0.9, 2.0)):
    exact = exit_mgf_exact(a, b, lam)
    bound = exit_mgf_bound(a, b, lam)
    print(f"  a={a}, b={b}, lam={lam}: exact {exact:.6f} <= bound {bound:.3f}")
est, se = mc_exit_mgf(0.5, 0.5, 1.0, n_paths=10**5, dt=5e-5, seed=0)
print(f"  MC at (0.5, 0.5, 1.0): {est:.6f} +- {se:.6f}")

print("\nrunning-maximum tail vs Gaussian bound:")
for k, s in ((1.0, 1.0), (2.0, 1.0)):
    p = mc_sup_tail(k, s, n_paths=30_000, n_steps=3_000, seed=0)
    print(f"  P(sup <= {k}*{s}) empirical {p:.4f} <= bound {bm_sup_tail(k, s):.4f}")
