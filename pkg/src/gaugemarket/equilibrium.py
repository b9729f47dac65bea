"""Walrasian exchange-and-production equilibrium.

Households have Cobb-Douglas preferences (demand depends only on the
expenditure weights, never on a utility scale) and firms choose among a
finite list of activity vectors. The solver iterates the damped
tatonnement map on the price simplex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import GoodsRegistry, as_prices, normalize_prices
from .errors import (
    DegenerateEconomy,
    InvalidEconomy,
    NoConvergence,
    ShapeMismatch,
    ZeroPriceDemandedGood,
)

SHARE_TOL = 1e-12
PRICE_FLOOR = 1e-9
MIN_STEP = 1e-8


def _frozen(arr: ArrayLike) -> NDArray[np.float64]:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Household:
    """A consumer with an endowment, Cobb-Douglas weights and firm shares.

    ``shares`` maps firm index to the fraction of that firm's profit the
    household receives.
    """

    endowment: NDArray[np.float64]
    cd_weights: NDArray[np.float64]
    shares: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        r = _frozen(self.endowment)
        w = _frozen(self.cd_weights)
        if r.ndim != 1 or r.shape != w.shape:
            raise ShapeMismatch(f"endowment {r.shape} and weights {w.shape} must be equal 1-d")
        if np.any(r < 0) or not np.any(r > 0):
            raise InvalidEconomy("endowment must be nonnegative with a positive entry")
        if np.any(w < 0) or abs(w.sum() - 1.0) > SHARE_TOL:
            raise InvalidEconomy(f"Cobb-Douglas weights must be >= 0 and sum to 1, got {w}")
        for firm, s in self.shares.items():
            if not 0.0 <= s <= 1.0:
                raise InvalidEconomy(f"share {s} in firm {firm} outside [0, 1]")
        object.__setattr__(self, "endowment", r)
        object.__setattr__(self, "cd_weights", w)
        object.__setattr__(self, "shares", dict(self.shares))


@dataclass(frozen=True, eq=False)
class Firm:
    """A firm choosing among finitely many production activities.

    Negative entries are inputs, positive entries outputs. The shutdown
    activity (zero vector) is appended when missing, so profit is never
    negative.
    """

    activities: NDArray[np.float64]

    def __post_init__(self):
        acts = np.array(self.activities, dtype=float)
        if acts.ndim == 1:
            acts = acts[None, :]
        if acts.ndim != 2 or acts.shape[0] == 0:
            raise InvalidEconomy("a firm needs a nonempty 2-d activity list")
        if not np.any(np.all(acts == 0.0, axis=1)):
            acts = np.vstack([acts, np.zeros(acts.shape[1])])
        acts.setflags(write=False)
        object.__setattr__(self, "activities", acts)


@dataclass(frozen=True, eq=False)
class Economy:
    registry: GoodsRegistry
    households: tuple[Household, ...]
    firms: tuple[Firm, ...] = ()

    def __post_init__(self):
        hh = tuple(self.households)
        firms = tuple(self.firms)
        n = self.registry.n
        if not hh:
            raise InvalidEconomy("an economy needs at least one household")
        for h in hh:
            if h.endowment.shape != (n,):
                raise ShapeMismatch(f"household vectors must have length {n}")
            for firm in h.shares:
                if not 0 <= firm < len(firms):
                    raise InvalidEconomy(f"share in unknown firm {firm}")
        for f in firms:
            if f.activities.shape[1] != n:
                raise ShapeMismatch(f"firm activities must have length {n}")
        for a in range(len(firms)):
            total = sum(h.shares.get(a, 0.0) for h in hh)
            if abs(total - 1.0) > SHARE_TOL:
                raise InvalidEconomy(f"shares of firm {a} sum to {total}, not 1")
        object.__setattr__(self, "households", hh)
        object.__setattr__(self, "firms", firms)

    @property
    def total_endowment(self) -> NDArray[np.float64]:
        return np.sum([h.endowment for h in self.households], axis=0)


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    """Outcome of :func:`solve_equilibrium`.

    ``residual`` is ``max |Z|``; ``complementarity`` is
    ``max(max Z+, max |p Z|)``, the contract a fixed point of the
    tatonnement map satisfies when some goods end up free.
    """

    p_star: NDArray[np.float64]
    demands: NDArray[np.float64]
    supplies: NDArray[np.float64]
    iterations: int
    residual: float
    complementarity: float
    excess: NDArray[np.float64]

    def to_summary(self) -> dict[str, Any]:
        return {
            "p_star": self.p_star,
            "residual": self.residual,
            "iterations": self.iterations,
            "demands": self.demands,
            "supplies": self.supplies,
        }


def household_income(h: Household, p: ArrayLike, firm_profits: Sequence[float]) -> float:
    """Endowment value plus dividend income ``p.r + sum_A share_A profit_A``."""
    p = as_prices(p)
    if p.shape != h.endowment.shape:
        raise ShapeMismatch(f"price length {p.shape} != endowment length {h.endowment.shape}")
    income = float(p @ h.endowment)
    for firm, share in h.shares.items():
        if firm >= len(firm_profits):
            raise ShapeMismatch(f"no profit supplied for firm {firm}")
        income += share * firm_profits[firm]
    return income


def cobb_douglas_demand(h: Household, p: ArrayLike, income: float) -> NDArray[np.float64]:
    p = as_prices(p)
    if income < 0:
        raise ValueError("income must be nonnegative")
    w = h.cd_weights
    if p.shape != w.shape:
        raise ShapeMismatch(f"price length {p.shape} != weight length {w.shape}")
    demanded = w > 0
    zero = demanded & (p == 0)
    if np.any(zero):
        raise ZeroPriceDemandedGood(int(np.flatnonzero(zero)[0]))
    out = np.zeros_like(w)
    out[demanded] = w[demanded] * income / p[demanded]
    return out


def firm_supply(f: Firm, p: ArrayLike) -> tuple[NDArray[np.float64], float]:
    """Profit-maximizing activity; ties go to the lowest index."""
    p = as_prices(p)
    profits = f.activities @ p
    k = int(np.argmax(profits))
    return f.activities[k].copy(), float(profits[k])


def _evaluate(e: Economy, p: NDArray[np.float64]):
    supplies = np.zeros((len(e.firms), e.registry.n))
    profits = []
    for k, f in enumerate(e.firms):
        supplies[k], profit = firm_supply(f, p)
        profits.append(profit)
    demands = np.array([
        cobb_douglas_demand(h, p, household_income(h, p, profits)) for h in e.households
    ])
    z = demands.sum(axis=0) - supplies.sum(axis=0) - e.total_endowment
    return z, demands, supplies


def excess_demand(e: Economy, p: ArrayLike) -> NDArray[np.float64]:
    """Aggregate demand minus production minus endowments at prices ``p``."""
    p = as_prices(p)
    if p.shape != (e.registry.n,):
        raise ShapeMismatch(f"expected {e.registry.n} prices, got {p.shape}")
    return _evaluate(e, p)[0]


def walras_residual(e: Economy, p: ArrayLike) -> float:
    """``p . Z(p)``; zero up to roundoff for every valid economy."""
    p = as_prices(p)
    return float(p @ excess_demand(e, p))


def tatonnement_step(p: ArrayLike, z: ArrayLike) -> NDArray[np.float64]:
    """One application of ``T(p)_a = (p_a + max(0, Z_a)) / (1 + sum_b max(0, Z_b))``."""
    p = as_prices(p)
    zp = np.maximum(np.asarray(z, dtype=float), 0.0)
    if p.shape != zp.shape:
        raise ShapeMismatch(f"price {p.shape} and excess demand {zp.shape} differ")
    return (p + zp) / (1.0 + zp.sum())


def _clamp(p: NDArray[np.float64], floor: float) -> NDArray[np.float64]:
    return normalize_prices(np.maximum(p, floor))


def solve_equilibrium(
    e: Economy,
    p0: ArrayLike | None = None,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    damping: float = 0.5,
    price_floor: float = PRICE_FLOOR,
    adaptive: bool = True,
) -> EquilibriumResult:
    """Damped tatonnement ``p <- (1-d) p + d T(p)`` from ``p0``.

    Stops when ``max |Z| <= tol`` or when the complementarity conditions
    ``Z <= tol`` and ``|p_a Z_a| <= tol`` hold componentwise (economies with
    free goods). Iterates are kept at least ``price_floor`` away from the
    simplex boundary. A free good's price decays only like ``1/t`` under
    this map, so tight tolerances on such economies need many iterations.

    ``T`` takes excess demand in quantity units, so a fixed step overshoots
    when endowments are large or a good is cheap. With ``adaptive`` the step
    ``d`` starts at ``damping``, halves whenever the residual grows, and
    creeps back up (x1.1 per improving step) under a ceiling that itself
    shrinks by 10% at every overshoot. ``adaptive=False`` keeps ``d`` fixed.
    """
    n = e.registry.n
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    p = np.full(n, 1.0 / n) if p0 is None else normalize_prices(p0)
    if p.shape != (n,):
        raise ShapeMismatch(f"expected {n} starting prices, got {p.shape}")
    p = _clamp(p, price_floor)
    trace: list[float] = []
    d = ceiling = damping
    previous = math.inf
    for it in range(max_iter):
        z, demands, supplies = _evaluate(e, p)
        residual = float(np.max(np.abs(z)))
        comp = max(float(np.max(z)), float(np.max(np.abs(p * z))), 0.0)
        if residual <= tol or comp <= tol:
            return EquilibriumResult(
                p_star=p, demands=demands, supplies=supplies, iterations=it,
                residual=residual, complementarity=comp, excess=z,
            )
        trace = (trace + [residual])[-10:]
        if adaptive:
            if residual > previous:
                ceiling = max(ceiling * 0.9, MIN_STEP)
                d = max(d * 0.5, MIN_STEP)
            else:
                d = min(ceiling, d * 1.1)
            previous = residual
        p = _clamp((1.0 - d) * p + d * tatonnement_step(p, z), price_floor)
    raise NoConvergence(max_iter, trace)


def edgeworth_equilibrium_oracle(
    alpha: float, beta: float, e1: ArrayLike, e2: ArrayLike
) -> NDArray[np.float64]:
    """Closed-form clearing prices of the 2x2 Cobb-Douglas exchange economy.

    ``alpha`` and ``beta`` are the two households' expenditure shares on the
    first good. Market clearing for that good gives

        p_x / p_y = (alpha e1_y + beta e2_y) / ((1-alpha) e1_x + (1-beta) e2_x)
    """
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    if e1.shape != (2,) or e2.shape != (2,):
        raise ShapeMismatch("Edgeworth endowments are 2-vectors")
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise ValueError("expenditure shares must lie in (0, 1)")
    num = alpha * e1[1] + beta * e2[1]
    den = (1 - alpha) * e1[0] + (1 - beta) * e2[0]
    if den <= 0 or num <= 0:
        raise DegenerateEconomy("market total must be positive in both goods")
    ratio = num / den
    return normalize_prices([ratio, 1.0])


def edgeworth_economy(alpha: float, beta: float, e1: ArrayLike, e2: ArrayLike,
                      goods: Sequence[str] = ("x", "y")) -> Economy:
    """The 2-household, 2-good exchange economy matching the oracle's arguments."""
    return Economy(
        GoodsRegistry(goods),
        (Household(e1, [alpha, 1 - alpha]), Household(e2, [beta, 1 - beta])),
    )
