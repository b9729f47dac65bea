import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaugemarket import arbitrage_search, market_graph, wbw_from_prices
from gaugemarket.arbitrage import canonical_rotation
from helpers import brute_force_cycles, consistent_wbw, random_market

SHAPES = [(1, 3), (1, 8), (2, 2), (2, 3), (2, 4), (3, 2), (4, 2)]


def test_shared_consistent_prices_have_no_arbitrage():
    w = wbw_from_prices([1.0, 3.0, 0.7])
    assert arbitrage_search(np.stack([w, w, w]), max_len=6) == []


def test_planted_three_cycle():
    w = np.ones((3, 3))
    w[0, 2], w[2, 0] = 1.5, 1 / 1.5
    cycles = arbitrage_search(w[None], max_len=3)
    assert [c.nodes for c in cycles] == [((0, 0), (0, 1), (0, 2))]
    assert cycles[0].gain == pytest.approx(1.5, rel=1e-15)


def test_two_agent_price_gap():
    # agent 1 sells good 1 cheaper than agent 0 buys it back
    m = np.stack([wbw_from_prices([1.0, 2.0]), wbw_from_prices([1.0, 1.6])])
    cycles = arbitrage_search(m, max_len=4)
    assert len(cycles) == 1
    assert cycles[0].gain == pytest.approx(2.0 / 1.6)
    assert cycles[0].nodes[0] == (0, 0)


def test_short_max_len_is_empty():
    w = np.ones((3, 3))
    w[0, 2], w[2, 0] = 1.5, 1 / 1.5
    assert arbitrage_search(w[None], max_len=1) == []
    assert arbitrage_search(w[None], max_len=0) == []


def test_graph_edges():
    g = market_graph(np.stack([wbw_from_prices([1.0, 2.0]), wbw_from_prices([1.0, 4.0])]))
    k = {node: n for n, node in enumerate(g.nodes)}
    assert g.ratio[k[(0, 0)], k[(0, 1)]] == 0.5
    assert g.ratio[k[(0, 0)], k[(1, 0)]] == 1.0
    assert g.ratio[k[(0, 0)], k[(1, 1)]] == 0.0
    assert g.cycle_gain([k[(0, 0)], k[(0, 1)], k[(1, 1)], k[(1, 0)]]) == pytest.approx(2.0)


def test_canonical_rotation():
    assert canonical_rotation([3, 1, 2]) == (1, 2, 3)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(SHAPES), st.sampled_from([0.0, 0.3]))
def test_matches_brute_force(seed, shape, unknown):
    rng = np.random.default_rng(seed)
    market = random_market(rng, *shape, unknown=unknown)
    got = {c.nodes: c.gain for c in arbitrage_search(market, max_len=4)}
    want = brute_force_cycles(market, 4)
    assert set(got) == set(want)
    for k in got:
        assert got[k] == pytest.approx(want[k], rel=1e-12)


def test_rejects_bad_market():
    with pytest.raises(ValueError):
        arbitrage_search(np.ones((2, 3)))
    with pytest.raises(ValueError):
        arbitrage_search(-np.ones((1, 2, 2)))


def test_consistent_random_agents():
    rng = np.random.default_rng(5)
    w = consistent_wbw(rng, 4)
    assert arbitrage_search(np.stack([w, w]), max_len=5) == []
