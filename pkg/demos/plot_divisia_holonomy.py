"""
A price index as a path integral
================================

Along a history of baskets and prices, the log of the Divisia index adds up
how the value of the current basket changes when only prices move. Walking
round a loop need not bring the index back to one; the leftover is the
curvature enclosed by the loop.
"""

import numpy as np

from gaugemarket import (EconomicHistory, curvature_form_F, holonomy_covariance_check,
                         path_holonomy, plaquette_check)
from gaugemarket.holonomy import TangentPair

# A fixed basket around a closed price loop: the index comes back exactly.
q = np.array([2.0, 1.0])
prices = [[1, 1], [2, 1], [2, 3], [1, 3], [1, 1]]
fixed = EconomicHistory.from_points([(q, p) for p in prices])
print("fixed basket loop:", path_holonomy(fixed))

# Change basket and prices in turns and the loop keeps a residue.
turns = EconomicHistory.from_points([([1, 1], [1, 1]), ([2, 1], [1, 1]), ([2, 1], [1, 2]),
                                     ([1, 1], [1, 2]), ([1, 1], [1, 1])])
print("alternating loop:", path_holonomy(turns))

# Inflating every price by L(t) moves the index by exactly L(end) / L(start).
lam = np.linspace(1.0, 3.0, len(turns))
p_plain, p_inflated = holonomy_covariance_check(turns, lam)
print("inflation ratio:", p_inflated / p_plain)

# Small loops: the log index matches the enclosed curvature, and the gap
# shrinks by about 16 each time the loop is halved.
for h in (0.04, 0.02, 0.01, 0.005):
    r = plaquette_check([1, 1], [1, 1], h, h)
    print(f"h={h:<6} lnP={r.log_holonomy:+.6e}  F={r.curvature:+.6e}  gap={r.defect:.2e}")

print("F at (1,1), unit moves:", curvature_form_F([1, 1], [1, 1], TangentPair([1, 0], [0, 1])))
