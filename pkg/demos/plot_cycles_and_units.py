"""
Trade cycles, units and arbitrage
=================================

Every agent keeps a what-by-what table: how much of one good it would give
for one unit of another. Changing the units an agent counts in rewrites its
table and its trade records, yet the gain around a closed loop of trades
stays the same. A loop whose gain exceeds one is an arbitrage.
"""

import numpy as np

from gaugemarket import (GaugeElement, TradeOp, arbitrage_search, cycle_curvature,
                         wbw_from_prices, wbw_gauge_transform, wbw_is_consistent)

w = wbw_from_prices([1.0, 2.0, 5.0])
print("consistent table:\n", w)
grams = wbw_gauge_transform(w, [1000.0, 1.0, 1.0])  # first good now counted in thousandths
print("after a unit change:\n", grams, "\nstill consistent:", wbw_is_consistent(grams))

# Three agents pass goods around a ring; O ratios multiply to the loop's gain R.
ring = [TradeOp(0, 1, 0, 1, 1.0, 2.0, n_b_i=2.0),
        TradeOp(1, 2, 1, 2, 1.0, 3.0, n_b_i=3.0),
        TradeOp(2, 0, 2, 0, 1.0, 0.2, n_b_i=0.2)]
phi = GaugeElement.random((3, 3), np.random.default_rng(0))
print("R before:", cycle_curvature("R", ring).value)
print("R after :", cycle_curvature("R", [t.gauge(phi) for t in ring]).value)

# S uses each giver's own valuation and is only stable when units change per agent
# or per good, not independently for each (agent, good) pair.
print("S before:", cycle_curvature("S", ring).value)
print("S after :", cycle_curvature("S", [t.gauge(phi) for t in ring]).value)

# Two agents with different views of the same price leave money on the table.
market = np.stack([wbw_from_prices([1.0, 2.0]), wbw_from_prices([1.0, 2.5])])
for c in arbitrage_search(market, max_len=4):
    print("cycle", c.nodes, "gain", round(c.gain, 6))
