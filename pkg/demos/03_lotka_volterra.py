"""Predator-prey cycles and the conserved quantity I = beta v + gamma u - alpha ln v - delta ln u.

The first part follows one orbit over 40 s and reads the solution between
steps straight from the local Borel sums. The second compares BPL and RKF45
on the long-run drift of I and the mean step. The third raises the stiffness
ratio r = delta / alpha and shows where BDF4 stops.
"""

import os
import sys

import numpy as np

from borel_laplace import (NON_STIFF_LV, BplConfig, Scenario, bpl_integrate, lv_first_integral,
                           lv_problem, run_scenario)

T_LONG = float(sys.argv[1]) if len(sys.argv) > 1 else 200.0
out = os.path.join(os.path.dirname(__file__), "out")

traj = bpl_integrate(lv_problem(), [2.0, 1.0], 40.0, BplConfig(eps=1e-8))
ts, us = traj.sample(20)
I = lv_first_integral(NON_STIFF_LV, us[:, 0], us[:, 1])
print(f"T=40: {traj.step_count} steps, {len(ts)} dense samples, "
      f"max |I - I0| / I0 = {np.max(np.abs(I - I[0])) / I[0]:.1e}")

print(f"\nT={T_LONG:g}, mean first-integral error vs mean step")
for scheme, tols in (("bpl", (1e-8, 1e-9)), ("rk4", (1e-10, 1e-11))):
    for tol in tols:
        m = run_scenario(Scenario(problem="lotka", scheme=scheme, tol=tol, T=T_LONG))
        print(f"  {scheme} tol={tol:.0e}: error {m.mean_error:.2e}, mean step {m.mean_step:.4f}, "
              f"{m.step_count} steps, {m.wall_time:.1f} s")

print(f"\nstiff rates, T={T_LONG:g}")
for r in (8, 32, 128):
    m = run_scenario(Scenario(problem="lotka", scheme="bpl", tol=1e-8, T=T_LONG, r=r,
                              residue_norm="componentwise"), raise_errors=False)
    print(f"  bpl r={r:3d}: {m.status}, error {m.mean_error:.2e}, mean step {m.mean_step:.4f}")
m = run_scenario(Scenario(problem="lotka", scheme="bdf", tol=1e-4, T=T_LONG, r=32,
                          out=os.path.join(out, "bdf_r32")), raise_errors=False)
print(f"  bdf r= 32: {m.status} {m.message}")
