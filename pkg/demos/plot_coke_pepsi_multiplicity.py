"""
Many efficient outcomes from one symmetric market
=================================================

Five people each want one drink and do not care whether it is a Coke or a
Pepsi. With two Cokes and three Pepsis every way of handing out one drink
per person is efficient, so symmetry alone leaves C(5, 2) = 10 outcomes.
"""

import math

from gaugemarket import enumerate_pareto_allocations, gallery_slots, indifferent_drinks

drinks = indifferent_drinks(5, 2)
efficient = enumerate_pareto_allocations(drinks)
print(f"{drinks.allocation_count()} ways to split the drinks, {len(efficient)} efficient")
for alloc in efficient[:4]:
    print("  ", ["coke" if cokes else "pepsi" for cokes, _ in alloc])

# The count is binomial for every size of the market.
for n in range(1, 7):
    row = [len(enumerate_pareto_allocations(indifferent_drinks(n, l))) for l in range(n + 1)]
    assert row == [math.comb(n, l) for l in range(n + 1)]
    print(f"n={n}: {row}")

# Same story with gallery slots: a scarce good nobody can hold twice.
print("6 artists, 2 slots:", len(enumerate_pareto_allocations(gallery_slots(6, 2))), "efficient outcomes")
