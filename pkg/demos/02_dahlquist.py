"""Adaptive BPL on u' = -u, and what the residue tolerance buys.

Each step builds a local solution, then grows the step while the residue
du/dt - F(u) of that local solution stays below eps relative to |u|.
"""

import numpy as np

from borel_laplace import BplConfig, Dahlquist, anm_integrate, bpl_integrate

problem = Dahlquist(-1.0)
ts = np.linspace(0, 10, 1000)

print(" eps      steps  mean step  max rel. error (dense)")
for eps in (1e-6, 1e-8, 1e-10, 1e-12):
    traj = bpl_integrate(problem, [1.0], 10.0, BplConfig(eps=eps))
    u = np.array([traj.dense_output(t)[0] for t in ts])
    err = np.max(np.abs(u - np.exp(-ts)) / np.exp(-ts))
    print(f" {eps:7.0e}  {traj.step_count:5d}  {traj.mean_step:9.4f}  {err:.2e}")

# Stiff rate: the truncated series is held back by its small stability
# interval, the summed series much less so.
cfg = BplConfig(eps=1e-8)
for lam in (-10.0, -100.0, -1000.0):
    b = bpl_integrate(Dahlquist(lam), [1.0], 1.0, cfg)
    a = anm_integrate(Dahlquist(lam), [1.0], 1.0, cfg)
    print(f"lam={lam:7.0f}: mean step BPL {b.mean_step:.2e} ({b.mean_step * -lam:.1f}/|lam|), "
          f"ANM {a.mean_step:.2e} ({a.mean_step * -lam:.1f}/|lam|)")
