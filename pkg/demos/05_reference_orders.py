"""Observed convergence orders of the four reference schemes on u' = -u."""

import math

import numpy as np

from borel_laplace import (AdaptiveConfig, Dahlquist, bdf4_integrate, etdrk4_integrate,
                           gauss_legendre10_integrate, rk4_fehlberg_integrate)

cases = [
    ("RKF45", rk4_fehlberg_integrate, Dahlquist(-1.0), [0.2, 0.1, 0.05, 0.025], 2.0),
    ("Gauss-Legendre 5", gauss_legendre10_integrate, Dahlquist(-1.0), [2.0, 1.5, 1.0, 0.75], 6.0),
    ("BDF4", bdf4_integrate, Dahlquist(-1.0), [0.1, 0.05, 0.025, 0.0125], 2.0),
    # half of the rate is treated as nonlinear so the scheme is not exact
    ("ETDRK4", etdrk4_integrate, Dahlquist(-1.0, split=0.5), [0.4, 0.2, 0.1, 0.05], 2.0),
]
for name, fn, problem, hs, T in cases:
    errs = [abs(fn(problem, [1.0], T, AdaptiveConfig(fixed_step=h)).final_state[0] - math.exp(-T))
            for h in hs]
    order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    print(f"{name:17s} errors " + " ".join(f"{e:.1e}" for e in errs) + f"  -> order {order:.2f}")
