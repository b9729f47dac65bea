"""Deterministic bilateral barter among agents with private what-by-what beliefs.

Each agent states its inventory and beliefs in its own units: ``units[g]``
own-units per common unit of good ``g``. Every comparison between agents is
made after converting to common units, so rescaling an agent's units leaves
the sequence of accepted and rejected trades unchanged.

The books are kept in common units on a grid: trade quantities are
multiples of :data:`QUANTUM` (a power of two), and so are initial holdings
and production activities. Every stock update is then exact in floating
point and per-good totals are conserved bit-for-bit whatever the agents'
unit scales. The own-unit inventory is a view of that stock.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidConfig, NoQuotes
from .gauge import TradeOp, wbw_from_prices
from .io import format_float, jsonl

QUANTUM = 2.0 ** -20
CROSS_TOL = 1e-9
LEDGER_COLUMNS = (
    "tick", "giver", "receiver", "good_give", "good_get",
    "qty_give", "qty_get", "quote_giver", "quote_receiver",
)


def quantize(x: ArrayLike) -> NDArray[np.float64]:
    return np.round(np.asarray(x, dtype=float) / QUANTUM) * QUANTUM


@dataclass(frozen=True, eq=False)
class AgentSpec:
    """Initial description of one agent, quantities in its own units.

    ``beliefs=None`` derives a consistent matrix from the config's base
    prices, perturbed by ``belief_noise``. ``production`` and ``needs`` are
    in common units.
    """

    id: str
    inventory: Sequence[float]
    beliefs: ArrayLike | None = None
    production: Sequence[float] | None = None
    needs: Sequence[float] | None = None
    units: Sequence[float] | None = None


@dataclass(frozen=True, eq=False)
class SimConfig:
    goods: tuple[str, ...]
    agents: tuple[AgentSpec, ...]
    seed: int
    ticks: int = 100
    learning_rate: float = 0.2
    max_trade: float = 1.0
    base_prices: Sequence[float] | None = None
    belief_noise: float = 0.0
    track_pairs: tuple[tuple[int, int], ...] = ((0, 1),)
    curvature_every: int = 0
    curvature_samples: int = 100
    curvature_max_len: int = 3
    death_after: int | None = None
    check_invariants: bool = False

    def validate(self) -> None:
        n = len(self.goods)
        if n < 2 or len(set(self.goods)) != n:
            raise InvalidConfig("goods", "need at least two distinct goods")
        if not self.agents:
            raise InvalidConfig("agents", "need at least one agent")
        if len({a.id for a in self.agents}) != len(self.agents):
            raise InvalidConfig("agents", "agent ids must be unique")
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool):
            raise InvalidConfig("seed", "an integer seed is mandatory")
        if self.ticks < 0:
            raise InvalidConfig("ticks", "must be nonnegative")
        if not 0.0 <= self.learning_rate <= 1.0:
            raise InvalidConfig("learning_rate", "must lie in [0, 1]")
        if not self.max_trade > 0:
            raise InvalidConfig("max_trade", "must be positive")
        if self.belief_noise < 0:
            raise InvalidConfig("belief_noise", "must be nonnegative")
        if self.base_prices is not None and (
                len(self.base_prices) != n or any(x <= 0 for x in self.base_prices)):
            raise InvalidConfig("base_prices", f"need {n} positive prices")
        for a, b in self.track_pairs:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise InvalidConfig("track_pairs", f"bad pair ({a}, {b})")
        if self.curvature_every < 0 or self.curvature_samples < 0 or self.curvature_max_len < 2:
            raise InvalidConfig("curvature_every", "curvature sampling parameters out of range")
        if self.death_after is not None and self.death_after < 1:
            raise InvalidConfig("death_after", "must be a positive tick count")
        for spec in self.agents:
            where = f"agents[{spec.id}]"
            inv = np.asarray(spec.inventory, dtype=float)
            if inv.shape != (n,) or np.any(inv < 0) or not np.all(np.isfinite(inv)):
                raise InvalidConfig(f"{where}.inventory", f"need {n} nonnegative quantities")
            if spec.units is not None:
                u = np.asarray(spec.units, dtype=float)
                if u.shape != (n,) or np.any(u <= 0):
                    raise InvalidConfig(f"{where}.units", "need positive unit scales")
            if spec.beliefs is not None:
                w = np.asarray(spec.beliefs, dtype=float)
                if w.shape != (n, n):
                    raise InvalidConfig(f"{where}.beliefs", f"need a {n}x{n} matrix")
                known = ~np.isnan(w)
                if np.any(w[known] <= 0):
                    raise InvalidConfig(f"{where}.beliefs", "known quotes must be positive")
            if spec.production is not None:
                act = np.asarray(spec.production, dtype=float)
                if act.shape != (n,):
                    raise InvalidConfig(f"{where}.production", f"need {n} entries")
                if not np.any(act < 0):
                    raise InvalidConfig(f"{where}.production",
                                        "an activity without inputs would produce without bound")
            if spec.needs is not None:
                needs = np.asarray(spec.needs, dtype=float)
                if needs.shape != (n,) or np.any(needs < 0):
                    raise InvalidConfig(f"{where}.needs", "need nonnegative per-good needs")


class HistoryEntry(NamedTuple):
    tick: int
    counterparty: int
    goods: tuple[int, int]
    quantities: tuple[float, float] | None  # (given, received) in own units
    accepted: bool


@dataclass(eq=False)
class AgentState:
    index: int
    id: str
    stock: NDArray[np.float64]  # common units, on the QUANTUM grid
    beliefs: NDArray[np.float64]
    units: NDArray[np.float64]
    production: NDArray[np.float64] | None = None
    needs: NDArray[np.float64] | None = None
    trade_history: list[HistoryEntry] = field(default_factory=list)
    alive: bool = True
    unmet_ticks: int = 0

    @property
    def inventory(self) -> NDArray[np.float64]:
        """Holdings in the agent's own units."""
        return self.stock * self.units

    def holdings(self) -> NDArray[np.float64]:
        """Holdings in common units."""
        return self.stock.copy()

    def quote(self, a: int, b: int) -> float:
        """Units of ``a`` per unit of ``b`` in common units (NaN if unknown)."""
        return float(self.beliefs[a, b] * self.units[b] / self.units[a])

    def common_beliefs(self) -> NDArray[np.float64]:
        return self.beliefs * self.units[None, :] / self.units[:, None]

    def credit(self, good: int, qty: float) -> None:
        self.stock[good] += qty

    def debit(self, good: int, qty: float) -> None:
        left = self.stock[good] - qty
        # only a rounding residue can go below zero here
        self.stock[good] = left if left > 0 else 0.0


class LedgerEntry(NamedTuple):
    tick: int
    giver: str
    receiver: str
    good_give: str
    good_get: str
    qty_give: float
    qty_get: float
    quote_giver: float
    quote_receiver: float


@dataclass(eq=False)
class TradeLedger:
    """Append-only record of executed trades, in execution order."""

    entries: list[LedgerEntry] = field(default_factory=list)
    ops: list[TradeOp] = field(default_factory=list)

    def append(self, entry: LedgerEntry, op: TradeOp) -> None:
        self.entries.append(entry)
        self.ops.append(op)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LEDGER_COLUMNS)
        for e in self.entries:
            w.writerow([
                e.tick, e.giver, e.receiver, e.good_give, e.good_get,
                format_float(e.qty_give), format_float(e.qty_get),
                format_float(e.quote_giver), format_float(e.quote_receiver),
            ])
        return buf.getvalue()


@dataclass(eq=False)
class SimState:
    config: SimConfig
    agents: list[AgentState]
    rng: np.random.Generator
    obs_rng: np.random.Generator
    ledger: TradeLedger = field(default_factory=TradeLedger)
    tick: int = 0

    @property
    def n_goods(self) -> int:
        return len(self.config.goods)

    def alive(self) -> list[AgentState]:
        return [a for a in self.agents if a.alive]

    def totals(self) -> NDArray[np.float64]:
        """Per-good sum of holdings in common units, dead agents included."""
        return np.sum([a.holdings() for a in self.agents], axis=0)

    def market(self) -> NDArray[np.float64]:
        """Snapshot of alive agents' beliefs in common units, shape ``(agents, N, N)``."""
        return np.array([a.common_beliefs() for a in self.alive()])


def init_simulation(cfg: SimConfig) -> SimState:
    """Build the initial state; identical config and seed give an identical state."""
    cfg.validate()
    n = len(cfg.goods)
    init_seq, dyn_seq, obs_seq = np.random.SeedSequence(int(cfg.seed)).spawn(3)
    init_rng = np.random.default_rng(init_seq)
    base = np.ones(n) if cfg.base_prices is None else np.asarray(cfg.base_prices, dtype=float)
    agents = []
    for k, spec in enumerate(cfg.agents):
        units = np.ones(n) if spec.units is None else np.asarray(spec.units, dtype=float)
        # noise is drawn for every agent so the stream does not depend on which specs set beliefs
        noise = init_rng.normal(0.0, 1.0, size=n) * cfg.belief_noise
        if spec.beliefs is None:
            common = wbw_from_prices(base * np.exp(noise))
            beliefs = common * units[:, None] / units[None, :]
        else:
            beliefs = np.array(spec.beliefs, dtype=float)
        np.fill_diagonal(beliefs, 1.0)
        common_inv = quantize(np.asarray(spec.inventory, dtype=float) / units)
        agents.append(AgentState(
            index=k,
            id=spec.id,
            stock=common_inv,
            beliefs=beliefs,
            units=units,
            production=None if spec.production is None else quantize(spec.production),
            needs=None if spec.needs is None else quantize(spec.needs),
        ))
    return SimState(cfg, agents, np.random.default_rng(dyn_seq), np.random.default_rng(obs_seq))


def negotiate_trade(i: AgentState, j: AgentState, a: int, b: int,
                    max_trade: float = 1.0, tick: int = 0) -> TradeOp | None:
    """Barter of good ``a`` for good ``b`` if the two agents' quotes strictly cross.

    Whoever values ``b`` higher (in units of ``a``) buys up to ``max_trade``
    units of it at the geometric mean of the two quotes, limited by both
    inventories. The returned operation has the buyer as ``giver`` (handing
    over ``a``) and the seller as ``receiver`` (handing over ``b``).
    """
    qi, qj = i.quote(a, b), j.quote(a, b)
    if math.isnan(qi) or math.isnan(qj):
        return None
    if qi > qj * (1.0 + CROSS_TOL):
        buyer, seller = i, j
    elif qj > qi * (1.0 + CROSS_TOL):
        buyer, seller = j, i
    else:
        return None
    rate = math.sqrt(qi * qj)
    have_a = buyer.holdings()[a]
    have_b = seller.holdings()[b]
    if have_a <= 0 or have_b <= 0:
        return None
    q_b = math.floor(min(max_trade, have_b, have_a / rate) / QUANTUM) * QUANTUM
    q_a = round(rate * q_b / QUANTUM) * QUANTUM
    if q_a > have_a:
        q_a -= QUANTUM
    if q_a <= 0 or q_b <= 0:
        return None
    return TradeOp(
        giver=buyer.index, receiver=seller.index, good_a=a, good_b=b,
        n_a_i=q_a * buyer.units[a], n_b_j=q_b * seller.units[b],
        n_b_i=q_b * buyer.units[b], n_a_j=q_a * seller.units[a], tick=tick,
    )


def run_production(agent: AgentState) -> AgentState:
    """Run the agent's activity as many whole times as its inputs allow."""
    act = agent.production
    if act is None:
        return agent
    have = agent.holdings()
    inputs = act < 0
    reps = math.floor(float(np.min(have[inputs] / -act[inputs])))
    while reps > 0 and np.any(have + reps * act < 0):
        reps -= 1
    if reps > 0:
        for g in np.flatnonzero(act):
            if act[g] > 0:
                agent.credit(int(g), reps * act[g])
            else:
                agent.debit(int(g), -reps * act[g])
    return agent


def _set_quote(agent: AgentState, a: int, b: int, internal: float) -> None:
    agent.beliefs[a, b] = internal
    agent.beliefs[b, a] = 1.0 / internal


def update_beliefs(agent: AgentState, observed: TradeOp, eta: float = 0.2) -> AgentState:
    """Move the quote for the traded pair toward the executed rate, geometrically.

    ``W <- W^(1-eta) rate^eta`` in the agent's own units, with the reciprocal
    entry kept at ``1/W``. An unknown quote is set to the rate outright.
    """
    a, b = observed.good_a, observed.good_b
    if agent.index == observed.giver:
        own_a, own_b = observed.n_a_i, observed.n_b_i
    elif agent.index == observed.receiver:
        own_a, own_b = observed.n_a_j, observed.n_b_j
    else:
        raise ValueError(f"agent {agent.index} is not a party to this trade")
    if own_a is None or own_b is None:
        raise ValueError("trade lacks this agent's own-unit quantities")
    rate = own_a / own_b
    current = agent.beliefs[a, b]
    if math.isnan(current):
        new = rate
    elif eta == 0.0:
        return agent
    else:
        new = current ** (1.0 - eta) * rate ** eta
    _set_quote(agent, a, b, new)
    return agent


def observe_quote(agent: AgentState, a: int, b: int, common_quote: float) -> None:
    """Adopt another agent's stated quote for a pair this agent has no view on."""
    _set_quote(agent, a, b, common_quote * agent.units[a] / agent.units[b])


def _apply_needs(state: SimState) -> None:
    death_after = state.config.death_after
    for agent in state.alive():
        if agent.needs is None:
            continue
        have = agent.holdings()
        short = bool(np.any(have < agent.needs))
        for g in np.flatnonzero(agent.needs):
            agent.debit(int(g), min(float(agent.needs[g]), float(have[g])))
        agent.unmet_ticks = agent.unmet_ticks + 1 if short else 0
        if death_after is not None and agent.unmet_ticks >= death_after:
            agent.alive = False


def tick(state: SimState) -> SimState:
    """One round: random pairing, one negotiation per pair, production, needs."""
    cfg = state.config
    n = state.n_goods
    t = state.tick + 1
    alive = [a.index for a in state.alive()]
    order = state.rng.permutation(alive) if alive else np.array([], dtype=int)
    for k in range(0, len(order) - 1, 2):
        i, j = state.agents[int(order[k])], state.agents[int(order[k + 1])]
        a, b = (int(x) for x in state.rng.choice(n, size=2, replace=False))
        qi, qj = i.quote(a, b), j.quote(a, b)
        op = negotiate_trade(i, j, a, b, cfg.max_trade, t)
        if op is None:
            if math.isnan(qi) and not math.isnan(qj):
                observe_quote(i, a, b, qj)
            elif math.isnan(qj) and not math.isnan(qi):
                observe_quote(j, a, b, qi)
            i.trade_history.append(HistoryEntry(t, j.index, (a, b), None, False))
            j.trade_history.append(HistoryEntry(t, i.index, (a, b), None, False))
            continue
        buyer, seller = state.agents[op.giver], state.agents[op.receiver]
        # back to the common grid; dividing out the unit scale can leave an ulp of error
        q_a = round(op.n_a_i / buyer.units[a] / QUANTUM) * QUANTUM
        q_b = round(op.n_b_j / seller.units[b] / QUANTUM) * QUANTUM
        quote_buyer, quote_seller = buyer.quote(a, b), seller.quote(a, b)
        buyer.debit(a, q_a)
        buyer.credit(b, q_b)
        seller.debit(b, q_b)
        seller.credit(a, q_a)
        buyer.trade_history.append(HistoryEntry(t, seller.index, (a, b), (op.n_a_i, op.n_b_i), True))
        seller.trade_history.append(HistoryEntry(t, buyer.index, (a, b), (op.n_b_j, op.n_a_j), True))
        update_beliefs(buyer, op, cfg.learning_rate)
        update_beliefs(seller, op, cfg.learning_rate)
        state.ledger.append(LedgerEntry(
            t, buyer.id, seller.id, cfg.goods[a], cfg.goods[b],
            q_a, q_b, quote_buyer, quote_seller,
        ), op)
    for agent in state.alive():
        run_production(agent)
    _apply_needs(state)
    state.tick = t
    if cfg.check_invariants:
        for agent in state.agents:
            if np.any(agent.stock < 0):
                raise AssertionError(f"negative inventory for {agent.id} at tick {t}")
    return state


def price_dispersion(state: SimState, a: int, b: int) -> float:
    """Population standard deviation of ``ln W[a, b]`` over agents quoting the pair."""
    logs = [math.log(q) for ag in state.alive() if not math.isnan(q := ag.quote(a, b))]
    if not logs:
        raise NoQuotes(f"no agent quotes goods ({a}, {b})")
    return float(np.std(logs))


def _cycle_gain(agents: Sequence[AgentState], cycle: Sequence[int], goods: Sequence[int]) -> float:
    """Gain of converting ``goods[k] -> goods[k+1]`` at agent ``cycle[k]`` all the way round."""
    gain = 1.0
    m = len(cycle)
    for k in range(m):
        a, b = goods[k], goods[(k + 1) % m]
        gain /= agents[cycle[k]].quote(a, b)
    return gain


def _stats(gains: list[float]) -> dict[str, Any]:
    if not gains:
        return {"n": 0, "mean_abs_log": None, "max_abs_log": None, "max": None}
    logs = [abs(math.log(g)) for g in gains]
    return {
        "n": len(gains),
        "mean_abs_log": math.fsum(logs) / len(logs),
        "max_abs_log": max(logs),
        "max": max(gains),
    }


def sample_cycle_curvatures(state: SimState, n_cycles: int, max_len: int = 3,
                            rng: np.random.Generator | None = None,
                            exhaustive: bool = False) -> dict[str, Any]:
    """Distribution of diagonal cycle curvatures over closed agent cycles.

    A cycle visits distinct alive agents ``i_0 .. i_{m-1}`` with a chain of
    goods that returns to its start; at each agent the held good is
    converted at that agent's quote and carried to the next. Cycles touching
    an unknown quote are skipped. With ``exhaustive=True`` every cycle up to
    ``max_len`` agents is evaluated and ``n_cycles`` is ignored.
    """
    agents = state.agents
    alive = [a.index for a in state.alive()]
    n = state.n_goods
    top = min(max_len, len(alive))
    gains: list[float] = []
    if exhaustive:
        for m in range(2, top + 1):
            for combo in itertools.permutations(alive, m):
                if combo[0] != min(combo):
                    continue
                for goods in itertools.product(range(n), repeat=m):
                    g = _cycle_gain(agents, combo, goods)
                    if not math.isnan(g):
                        gains.append(g)
        return _stats(gains)
    if top < 2:
        return _stats([])
    rng = state.obs_rng if rng is None else rng
    for _ in range(n_cycles):
        m = int(rng.integers(2, top + 1))
        combo = [int(x) for x in rng.choice(alive, size=m, replace=False)]
        goods = [int(x) for x in rng.integers(0, n, size=m)]
        g = _cycle_gain(agents, combo, goods)
        if not math.isnan(g):
            gains.append(g)
    return _stats(gains)


def observe(state: SimState) -> dict[str, Any]:
    """Observables recorded after each tick."""
    cfg = state.config
    disp = {}
    for a, b in cfg.track_pairs:
        key = f"{cfg.goods[a]}/{cfg.goods[b]}"
        try:
            disp[key] = price_dispersion(state, a, b)
        except NoQuotes:
            disp[key] = None
    volume = {g: 0.0 for g in cfg.goods}
    trades = 0
    for e in reversed(state.ledger.entries):
        if e.tick != state.tick:
            break
        trades += 1
        volume[e.good_give] += e.qty_give
        volume[e.good_get] += e.qty_get
    record: dict[str, Any] = {
        "tick": state.tick,
        "alive": len(state.alive()),
        "trades": trades,
        "volume": volume,
        "dispersion": disp,
    }
    if cfg.curvature_every and state.tick % cfg.curvature_every == 0:
        record["curvature"] = sample_cycle_curvatures(
            state, cfg.curvature_samples, cfg.curvature_max_len)
    return record


class SimulationResult(NamedTuple):
    ledger: TradeLedger
    observables: list[dict[str, Any]]
    state: SimState

    def observables_jsonl(self) -> str:
        return jsonl(self.observables)


def run_simulation(cfg: SimConfig) -> SimulationResult:
    """Run ``cfg.ticks`` ticks and collect the ledger plus per-tick observables."""
    state = init_simulation(cfg)
    records = [observe(state)]
    for _ in range(cfg.ticks):
        tick(state)
        records.append(observe(state))
    return SimulationResult(state.ledger, records, state)
