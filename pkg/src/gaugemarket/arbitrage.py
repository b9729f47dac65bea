"""Arbitrage cycles in a snapshot of agents' what-by-what quotes.

The market graph has one node per ``(agent, good)``. At agent ``i`` one unit
of ``a`` converts into ``1 / W_i[a, b]`` units of ``b`` (the agent hands over
one ``b`` for every ``W_i[a, b]`` units of ``a``), and a good can be carried
between agents at ratio 1. The gain of a closed walk is the product of its
ratios, which is exactly the diagonal curvature of that cycle of trades.

Cycles are found with a depth-limited search whose pruning bound comes from
length-limited Bellman-Ford shortest paths on the weights ``-ln(ratio)``: a
branch is dropped once even the cheapest way back to the start cannot make
the total weight negative enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

GAIN_TOL = 1e-9

Node = tuple[int, int]


class ArbitrageCycle(NamedTuple):
    nodes: tuple[Node, ...]
    gain: float


@dataclass(frozen=True, eq=False)
class MarketGraph:
    nodes: tuple[Node, ...]
    ratio: NDArray[np.float64]  # ratio[u, v] > 0 for an edge u -> v, else 0

    @property
    def weight(self) -> NDArray[np.float64]:
        with np.errstate(divide="ignore"):
            return np.where(self.ratio > 0, -np.log(np.where(self.ratio > 0, self.ratio, 1.0)), np.inf)

    def cycle_gain(self, path: Sequence[int]) -> float:
        """Product of ratios along ``path`` and back to its first node (0 if an edge is missing)."""
        closed = list(path) + [path[0]]
        return math.prod(float(self.ratio[u, v]) for u, v in zip(closed, closed[1:]))


def as_market(market: ArrayLike) -> NDArray[np.float64]:
    arr = np.asarray(market, dtype=float)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError(f"market must have shape (agents, goods, goods), got {arr.shape}")
    known = ~np.isnan(arr)
    if np.any(arr[known] <= 0):
        raise ValueError("known quotes must be positive")
    return arr


def market_graph(market: ArrayLike) -> MarketGraph:
    w = as_market(market)
    n_agents, n_goods, _ = w.shape
    nodes = tuple((i, a) for i in range(n_agents) for a in range(n_goods))
    index = {node: k for k, node in enumerate(nodes)}
    ratio = np.zeros((len(nodes), len(nodes)))
    for i in range(n_agents):
        for a in range(n_goods):
            u = index[(i, a)]
            for b in range(n_goods):
                if b != a and not np.isnan(w[i, a, b]):
                    ratio[u, index[(i, b)]] = 1.0 / w[i, a, b]
            for j in range(n_agents):
                if j != i:
                    ratio[u, index[(j, a)]] = 1.0
    return MarketGraph(nodes, ratio)


def canonical_rotation(path: Sequence[int]) -> tuple[int, ...]:
    k = min(range(len(path)), key=lambda m: path[m])
    return tuple(path[k:]) + tuple(path[:k])


def _return_bounds(weight: NDArray[np.float64], start: int, max_edges: int) -> NDArray[np.float64]:
    """``out[k, v]``: least weight of a walk ``v -> start`` of at most ``k`` edges over nodes >= start."""
    m = weight.shape[0]
    allowed = np.arange(m) >= start
    w = np.where(allowed[None, :] & allowed[:, None], weight, np.inf)
    out = np.full((max_edges + 1, m), np.inf)
    out[0, start] = 0.0
    for k in range(1, max_edges + 1):
        via = np.min(w + out[k - 1][None, :], axis=1)
        out[k] = np.minimum(out[k - 1], via)
    return out


def arbitrage_search(market: ArrayLike, max_len: int = 4,
                     tol: float = GAIN_TOL) -> list[ArbitrageCycle]:
    """Every simple cycle of 2..``max_len`` edges whose gain is at least ``1 + tol``.

    Each cycle is reported once, rotated so its smallest node comes first;
    the list is sorted by node sequence.
    """
    graph = market_graph(market)
    if max_len < 2:
        return []
    weight = graph.weight
    m = len(graph.nodes)
    threshold = -math.log1p(tol)
    slack = 1e-9  # never prune a branch that is borderline in log space
    found: list[ArbitrageCycle] = []

    for s in range(m):
        bound = _return_bounds(weight, s, max_len)
        path = [s]
        on_path = {s}

        def extend(v: int, partial: float) -> None:
            depth = len(path)  # edges used once we step onward
            for u in np.flatnonzero(np.isfinite(weight[v])):
                u = int(u)
                if u == s:
                    if depth >= 2:
                        gain = graph.cycle_gain(path)
                        if gain >= 1.0 + tol:
                            found.append(ArbitrageCycle(
                                tuple(graph.nodes[k] for k in path), gain))
                    continue
                if u < s or u in on_path or depth >= max_len:
                    continue
                step = partial + weight[v, u]
                if step + bound[max_len - depth, u] > threshold + slack:
                    continue
                path.append(u)
                on_path.add(u)
                extend(u, step)
                path.pop()
                on_path.discard(u)

        extend(s, 0.0)

    found.sort(key=lambda c: c.nodes)
    return found
