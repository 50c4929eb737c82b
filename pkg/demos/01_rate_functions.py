"""Rate functions on the overlap axis: entropy, the principal branch, zeta.

Walks the analytic layer with no sampling involved: prints the shape of
Upsilon across u for a few (p, beta, gamma), then the critical gamma curve
zeta(p) climbing toward sqrt(2 log 2).
"""

import math

import numpy as np

from trapclock.analysis import RateFunctionParams, entropy_I, upsilon, zeta

u = np.linspace(0.0, 1.0, 11)

print("entropy I(u) on a coarse grid:")
print("  u:", " ".join(f"{x:5.2f}" for x in u))
print("  I:", " ".join(f"{v:5.3f}" for v in entropy_I(u)))
print()

for p, beta, gamma in ((2, 1.0, 0.5), (3, 1.3, 0.6), (4, 2.0, 1.0)):
    params = RateFunctionParams(p=p, beta=beta, gamma=gamma)
    vals = upsilon(params, u)
    peak = float(np.max(vals))
    print(f"Upsilon(u) for p={p} beta={beta} gamma={gamma}:")
    print("  ", " ".join(f"{v:7.3f}" for v in vals))
    print(f"   max {peak:.4f} at u = {u[int(np.argmax(vals))]:.2f} "
          f"(zero at u = 1/2 marks the binding overlap)")
    print()

# The threshold gamma at beta = 1: below it the principal rate stays
# nonpositive on [0, 1/2], above it a positive bump appears.
print("zeta(p), the largest gamma with sup Upsilon_principal <= 0 at beta = 1:")
limit = math.sqrt(2.0 * math.log(2.0))
for p in (2, 3, 4, 6, 10, 20, 50):
    print(f"  p = {p:2d}: zeta = {zeta(p):.5f}")
print(f"  p -> infinity: sqrt(2 log 2) = {limit:.5f}")
