"""How far along the negative real axis does one step stay stable?

A step of the truncated series (ANM) on u' = lam u multiplies the state by
the degree-K Taylor polynomial of exp(z), z = lam h. Summing the same
series through Borel, Padé and Laplace replaces that polynomial by a
rational-like function whose stable interval grows much faster with K.
"""

import numpy as np

from borel_laplace import gauss_laguerre_rule, region_mask, region_size
from borel_laplace.summation import default_degrees

rule = gauss_laguerre_rule(100)

print(" K   |D| ANM   |D| BPL   Padé")
anm, bpl = [], []
for K in range(2, 13):
    Ka, Kb = default_degrees(K)
    a = region_size("anm", {"K": K})
    b = region_size("bpl", {"K": K, "Ka": Ka, "Kb": Kb, "rule": rule})
    anm.append(a)
    bpl.append(b)
    print(f"{K:2d}  {a:8.4f}  {b:8.4f}   [{Ka}/{Kb}]")

Ks = np.arange(2, 13)
print(f"\nleast-squares growth per order: ANM {np.polyfit(Ks[:9], anm[:9], 1)[0]:.3f}, "
      f"BPL {np.polyfit(Ks, bpl, 1)[0]:.3f}")

# Smaller numerator degree at fixed K enlarges the region further.
print("\nK=10, decreasing numerator degree:")
for Ka in (4, 3, 2, 1, 0):
    d = region_size("bpl", {"K": 10, "Ka": Ka, "Kb": 9 - Ka, "rule": rule}, max_d=500.0)
    print(f"  [{Ka}/{9 - Ka}]  |D| " + ("> 500 (no exit found)" if d >= 500 else f"= {d:.3f}"))

# A coarse picture of the K=4 regions in the complex plane.
for method, params in (("anm", {"K": 4}), ("bpl", {"K": 4, "rule": rule})):
    g = region_mask(method, params, (-8, 1), (-4, 4), 37)
    print(f"\n{method.upper()} K=4 ('#' stable), Re in [-8, 1], Im in [-4, 4]")
    for row in g.mask[::-2]:
        print("  " + "".join("#" if v else "." for v in row))
