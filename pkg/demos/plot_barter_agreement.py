"""
Barter without a price list
===========================

Twenty agents start with the same stocks but different ideas of what
apples are worth in bread. They meet at random and swap whenever their
quotes leave room for both sides, settling halfway (in log terms). After
each trade they move their quote toward the rate they got. The spread of
opinions shrinks as trading goes on.
"""

import numpy as np

from gaugemarket import AgentSpec, SimConfig, run_simulation

agents = tuple(AgentSpec(f"a{k:02d}", [50.0, 50.0]) for k in range(20))
config = SimConfig(("apples", "bread"), agents, seed=7, ticks=2000, belief_noise=0.6,
                   curvature_every=500)
result = run_simulation(config)

for rec in result.observables[::250]:
    print(f"tick {rec['tick']:>4}  trades {rec['trades']:>2}  spread {rec['dispersion']['apples/bread']:.4f}")

state = result.state
print("trades recorded:", len(result.ledger))
print("totals (unchanged by trade):", state.totals())
rates = np.array([a.quote(0, 1) for a in state.alive()])
print("final quotes: median", np.median(rates), "range", rates.min(), rates.max())

# Sampled loop gains are close to one once the agents agree.
for rec in result.observables:
    if "curvature" in rec:
        print(f"tick {rec['tick']}: loop gain stats", rec["curvature"])

print(result.ledger.to_csv().splitlines()[:3])
