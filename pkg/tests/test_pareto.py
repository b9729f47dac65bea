import itertools
import math

import pytest

from gaugemarket import (DiscreteScenario, enumerate_pareto_allocations, gallery_slots,
                         indifferent_drinks)
from gaugemarket.errors import ScenarioTooLarge
from gaugemarket.pareto import capped_total, iter_allocations


def test_coke_pepsi_four_agents():
    found = enumerate_pareto_allocations(indifferent_drinks(4, 2))
    assert len(found) == math.comb(4, 2) == 6
    # every efficient allocation gives each agent exactly one drink
    assert all(sum(bundle) == 1 for alloc in found for bundle in alloc)


def test_all_pepsi_single_allocation():
    assert len(enumerate_pareto_allocations(indifferent_drinks(5, 0))) == 1


def test_artists():
    found = enumerate_pareto_allocations(gallery_slots(3, 1))
    assert len(found) == 3
    assert sorted(found) == [((0,), (0,), (1,)), ((0,), (1,), (0,)), ((1,), (0,), (0,))]


@pytest.mark.parametrize("n", range(1, 9))
def test_multiplicity_is_binomial(n):
    for coke in range(n + 1):
        assert len(enumerate_pareto_allocations(indifferent_drinks(n, coke))) == math.comb(n, coke)


def test_allocation_count_matches_enumeration():
    s = DiscreteScenario((3, 2), tuple(capped_total(2) for _ in range(3)))
    assert len(list(iter_allocations(s))) == s.allocation_count() == math.comb(5, 2) * math.comb(4, 2)


def _naive_pareto(s):
    allocs = list(iter_allocations(s))
    utils = [tuple(u(b) for u, b in zip(s.utilities, a)) for a in allocs]

    def dom(x, y):
        return all(p >= q for p, q in zip(x, y)) and x != y

    return sorted(a for a, ua in zip(allocs, utils) if not any(dom(ub, ua) for ub in utils))


@pytest.mark.parametrize("caps,supplies", [((1, 2, 3), (3, 1)), ((2, 2), (2, 2)), ((1, 5), (4,))])
def test_matches_pairwise_oracle(caps, supplies):
    weights = list(itertools.islice(itertools.cycle([(1.0, 2.0), (2.0, 1.0)]), len(caps)))
    s = DiscreteScenario(supplies, tuple(
        capped_total(c, w[:len(supplies)]) for c, w in zip(caps, weights)))
    assert enumerate_pareto_allocations(s) == _naive_pareto(s)


def test_limit():
    with pytest.raises(ScenarioTooLarge):
        enumerate_pareto_allocations(indifferent_drinks(8, 4), limit=10)
