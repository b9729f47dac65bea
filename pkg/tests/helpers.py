"""Random instance generators and brute-force oracles shared by the tests.

The oracles here are deliberately written from the definitions, without
reusing the library code they check.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from gaugemarket import Economy, Firm, GoodsRegistry, Household, wbw_from_prices


def random_economy(rng: np.random.Generator, n_goods: int, n_households: int,
                   n_firms: int) -> Economy:
    households_shares = [dict() for _ in range(n_households)]
    firms = []
    for f in range(n_firms):
        acts = rng.uniform(-2.0, 2.0, size=(int(rng.integers(1, 4)), n_goods))
        firms.append(Firm(acts))
        split = rng.dirichlet(np.ones(n_households))
        # make the split sum to one in floating point
        split[-1] = 1.0 - math.fsum(split[:-1])
        for h, s in enumerate(split):
            if s > 0:
                households_shares[h][f] = float(s)
    households = []
    for h in range(n_households):
        endow = rng.uniform(0.0, 3.0, size=n_goods) * (rng.random(n_goods) < 0.8)
        endow[rng.integers(n_goods)] += 0.5
        w = rng.dirichlet(np.ones(n_goods))
        w[-1] = 1.0 - math.fsum(w[:-1])
        households.append(Household(endow, w, households_shares[h]))
    names = [f"g{k}" for k in range(n_goods)]
    return Economy(GoodsRegistry(names), tuple(households), tuple(firms))


def interior_prices(rng: np.random.Generator, n: int) -> np.ndarray:
    p = rng.uniform(0.05, 1.0, size=n)
    return p / p.sum()


def consistent_wbw(rng: np.random.Generator, n: int, log_sd: float = 1.0) -> np.ndarray:
    p = np.exp(rng.normal(0.0, log_sd, size=n))
    return p[None, :] / p[:, None]


def brute_force_cycles(market: np.ndarray, max_len: int, tol: float = 1e-9):
    """Every simple cycle in the (agent, good) graph with gain >= 1 + tol.

    At agent i one unit of good a buys 1 / W_i[a, b] units of b; any good
    moves between agents one for one.
    """
    market = np.asarray(market, dtype=float)
    n_agents, n_goods, _ = market.shape
    nodes = [(i, a) for i in range(n_agents) for a in range(n_goods)]

    def ratio(u, v):
        (i, a), (j, b) = u, v
        if i == j and a != b:
            w = market[i, a, b]
            return None if np.isnan(w) else 1.0 / w
        if i != j and a == b:
            return 1.0
        return None

    found = {}
    for length in range(2, max_len + 1):
        for combo in itertools.permutations(range(len(nodes)), length):
            if combo[0] != min(combo):
                continue
            gain = 1.0
            for k in range(length):
                r = ratio(nodes[combo[k]], nodes[combo[(k + 1) % length]])
                if r is None:
                    break
                gain *= r
            else:
                if gain >= 1.0 + tol:
                    found[tuple(nodes[k] for k in combo)] = gain
    return found


def random_market(rng, agents, goods, unknown=0.0, spread=0.3):
    base = np.exp(rng.normal(0, 1, goods))
    out = np.empty((agents, goods, goods))
    for i in range(agents):
        p = base * np.exp(rng.normal(0, spread, goods))
        w = wbw_from_prices(p)
        # let some agents hold incoherent quotes too
        if rng.random() < 0.5:
            w = w * np.exp(rng.normal(0, spread, (goods, goods)))
            w = np.sqrt(w / w.T)
        mask = np.triu(rng.random((goods, goods)) < unknown, 1)
        w[mask | mask.T] = np.nan
        np.fill_diagonal(w, 1.0)
        out[i] = w
    return out
