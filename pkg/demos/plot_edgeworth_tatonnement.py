"""
Price adjustment in an Edgeworth box
====================================

Two households trade apples for bread. Each spends a fixed share of its
wealth on each good. We let prices adjust toward excess demand and compare
the result with the closed-form clearing price.
"""

import numpy as np

from gaugemarket import (edgeworth_economy, edgeworth_equilibrium_oracle, excess_demand,
                         solve_equilibrium, walras_residual)

alpha, beta = 0.3, 0.7
e1, e2 = [4.0, 1.0], [2.0, 3.0]
economy = edgeworth_economy(alpha, beta, e1, e2, goods=("apples", "bread"))

# At any prices the value of excess demand is zero; only its direction matters.
for p in ([0.2, 0.8], [0.5, 0.5], [0.9, 0.1]):
    print(f"p = {p}  Z = {np.round(excess_demand(economy, p), 4)}  p.Z = {walras_residual(economy, p):.1e}")

result = solve_equilibrium(economy, p0=[0.9, 0.1], tol=1e-12)
print("tatonnement:", result.p_star, "after", result.iterations, "steps")
print("closed form:", edgeworth_equilibrium_oracle(alpha, beta, e1, e2))

# Each household ends with the bundle it demands at p*; the columns add up to the endowments.
print("household demands:\n", np.round(result.demands, 6))
