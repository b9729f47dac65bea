"""Exhaustive Pareto-efficient allocations for small discrete economies.

Used to exhibit how symmetric preferences combined with scarcity produce
many equally efficient outcomes: n indifferent agents sharing l units of
one brand and n-l of another have exactly C(n, l) efficient allocations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .errors import ScenarioTooLarge

Bundle = tuple[int, ...]
Allocation = tuple[Bundle, ...]
Utility = Callable[[Bundle], float]

MAX_ALLOCATIONS = 10**7


@dataclass(frozen=True)
class DiscreteScenario:
    """Integer supplies of each good and one utility function per agent.

    Every unit of every good is handed out; an allocation is a tuple of
    per-agent bundles.
    """

    supplies: tuple[int, ...]
    utilities: tuple[Utility, ...]
    goods: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "supplies", tuple(int(s) for s in self.supplies))
        object.__setattr__(self, "utilities", tuple(self.utilities))
        if any(s < 0 for s in self.supplies):
            raise ValueError("supplies must be nonnegative integers")
        if not self.utilities:
            raise ValueError("a scenario needs at least one agent")
        if self.goods is not None and len(self.goods) != len(self.supplies):
            raise ValueError("one name per good")

    @property
    def n_agents(self) -> int:
        return len(self.utilities)

    def allocation_count(self) -> int:
        n = self.n_agents
        return math.prod(math.comb(s + n - 1, n - 1) for s in self.supplies)


def capped_total(cap: float, weights: Sequence[float] | None = None) -> Utility:
    """``min(cap, sum_g w_g x_g)``: indifferent between goods up to a satiation cap."""

    def u(bundle: Bundle) -> float:
        w = weights if weights is not None else (1.0,) * len(bundle)
        return min(cap, sum(wi * xi for wi, xi in zip(w, bundle)))

    return u


def indifferent_drinks(n: int, coke: int) -> DiscreteScenario:
    """n agents wanting exactly one drink each, ``coke`` Cokes and ``n-coke`` Pepsis."""
    if not 0 <= coke <= n:
        raise ValueError("need 0 <= coke <= n")
    return DiscreteScenario(
        supplies=(coke, n - coke),
        utilities=tuple(capped_total(1.0) for _ in range(n)),
        goods=("coke", "pepsi"),
    )


def gallery_slots(n: int, slots: int) -> DiscreteScenario:
    """n identical artists competing for ``slots`` gallery places, one each at most."""
    return DiscreteScenario(
        supplies=(slots,),
        utilities=tuple(capped_total(1.0) for _ in range(n)),
        goods=("slot",),
    )


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    # stars and bars: place parts-1 bars among total+parts-1 slots
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 1 - prev - 1)
        yield tuple(out)


def iter_allocations(s: DiscreteScenario) -> Iterator[Allocation]:
    """Every way of splitting all supplies among the agents, in a fixed order."""
    n = s.n_agents
    per_good = [list(_compositions(total, n)) for total in s.supplies]
    for split in itertools.product(*per_good):
        yield tuple(tuple(split[g][i] for g in range(len(split))) for i in range(n))


def _dominates(u: tuple[float, ...], v: tuple[float, ...]) -> bool:
    return all(a >= b for a, b in zip(u, v)) and any(a > b for a, b in zip(u, v))


def enumerate_pareto_allocations(
    s: DiscreteScenario, limit: int = MAX_ALLOCATIONS
) -> list[Allocation]:
    """All allocations whose utility profile no other allocation dominates."""
    count = s.allocation_count()
    if count > limit:
        raise ScenarioTooLarge(f"{count} allocations exceed the limit of {limit}")
    profiles: dict[tuple[float, ...], list[Allocation]] = {}
    for alloc in iter_allocations(s):
        key = tuple(float(u(b)) for u, b in zip(s.utilities, alloc))
        profiles.setdefault(key, []).append(alloc)
    # dominance depends only on the utility profile, so compare distinct profiles
    keys = list(profiles)
    efficient = [k for k in keys if not any(_dominates(o, k) for o in keys)]
    out = [a for k in efficient for a in profiles[k]]
    out.sort()
    return out
