"""JSON scenario files: parsing, validation and construction of module inputs.

A scenario is a JSON object::

    {
      "kind": "equilibrium" | "simulation" | "holonomy" | "arbitrage" | "pareto",
      "seed": 0,
      "goods": ["x", "y"],
      "outputs": {"summary": "summary.json"},
      "payload": {...}
    }

Quantities keyed by good name are given as ``{"good": value}`` objects.
Unknown keys are rejected at every level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .core import GoodsRegistry
from .equilibrium import Economy, Firm, Household
from .errors import MarketError
from .holonomy import EconomicHistory, read_history_csv
from .pareto import DiscreteScenario, capped_total
from .sim import AgentSpec, SimConfig

KINDS = ("equilibrium", "simulation", "holonomy", "arbitrage", "pareto")
DEFAULT_OUTPUTS = {
    "equilibrium": {"summary": "summary.json"},
    "simulation": {"summary": "summary.json", "ledger": "ledger.csv",
                   "observables": "observables.jsonl"},
    "holonomy": {"summary": "summary.json"},
    "arbitrage": {"summary": "summary.json"},
    "pareto": {"summary": "summary.json"},
}


class ScenarioError(MarketError, ValueError):
    """Base class for scenario problems; ``to_json`` gives the machine-readable form."""

    code = "ScenarioError"

    def __init__(self, message: str, **detail: Any):
        super().__init__(message)
        self.detail = detail

    def to_json(self) -> dict[str, Any]:
        return {"error": self.code, "stage": "parse", **self.detail, "message": str(self)}


class ParseError(ScenarioError):
    code = "ParseError"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message, line=line)
        self.line = line


class MissingField(ScenarioError):
    code = "MissingField"

    def __init__(self, name: str):
        super().__init__(f"missing required field {name!r}", name=name)
        self.name = name


class UnknownField(ScenarioError):
    code = "UnknownField"

    def __init__(self, name: str):
        super().__init__(f"unknown field {name!r}", name=name)
        self.name = name


class UnknownGood(ScenarioError):
    code = "UnknownGood"

    def __init__(self, name: str):
        super().__init__(f"good {name!r} is not declared in 'goods'", name=name)
        self.name = name


class InvalidValue(ScenarioError):
    code = "InvalidValue"

    def __init__(self, name: str, reason: str):
        super().__init__(f"invalid value for {name!r}: {reason}", name=name)
        self.name = name


@dataclass(eq=False)
class Scenario:
    kind: str
    registry: GoodsRegistry
    seed: int
    outputs: dict[str, str]
    payload: dict[str, Any]
    model: Any
    options: dict[str, Any] = field(default_factory=dict)
    base_dir: Path = Path(".")


def _check_keys(obj: Any, where: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(obj, dict):
        raise InvalidValue(where, "expected a JSON object")
    for key in required:
        if key not in obj:
            raise MissingField(key)
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            raise UnknownField(f"{where}.{key}" if where else key)
    return obj


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidValue(name, "expected a finite number")
    return float(value)


def _good_vector(reg: GoodsRegistry, obj: Any, name: str, default: float = 0.0) -> np.ndarray:
    if not isinstance(obj, dict):
        raise InvalidValue(name, "expected an object keyed by good name")
    for good in obj:
        if good not in reg:
            raise UnknownGood(good)
    return reg.vector({g: _number(v, f"{name}.{g}") for g, v in obj.items()}, default)


def _good_matrix(reg: GoodsRegistry, obj: Any, name: str) -> np.ndarray:
    """Quotes ``{a: {b: W_ab}}``; reciprocals filled in, everything else unknown."""
    n = reg.n
    w = np.full((n, n), np.nan)
    np.fill_diagonal(w, 1.0)
    if not isinstance(obj, dict):
        raise InvalidValue(name, "expected {good: {good: quote}}")
    stated = set()
    for a, row in obj.items():
        if a not in reg:
            raise UnknownGood(a)
        if not isinstance(row, dict):
            raise InvalidValue(f"{name}.{a}", "expected an object")
        for b, q in row.items():
            if b not in reg:
                raise UnknownGood(b)
            q = _number(q, f"{name}.{a}.{b}")
            if q <= 0:
                raise InvalidValue(f"{name}.{a}.{b}", "quotes must be positive")
            ia, ib = reg.index(a), reg.index(b)
            w[ia, ib] = q
            stated.add((ia, ib))
    for ia, ib in stated:
        if (ib, ia) not in stated:
            w[ib, ia] = 1.0 / w[ia, ib]
    return w


def _good_index(reg: GoodsRegistry, name: Any) -> int:
    if name not in reg:
        raise UnknownGood(str(name))
    return reg.index(name)


def _build_equilibrium(reg: GoodsRegistry, payload: dict) -> tuple[Economy, dict]:
    _check_keys(payload, "payload", ("households",),
                ("firms", "p0", "tol", "max_iter", "damping"))
    firms_raw = payload.get("firms", [])
    if not isinstance(firms_raw, list):
        raise InvalidValue("firms", "expected a list")
    firm_names: dict[str, int] = {}
    firms = []
    for k, f in enumerate(firms_raw):
        _check_keys(f, f"firms[{k}]", ("activities",), ("name",))
        name = str(f.get("name", f"firm{k}"))
        if name in firm_names:
            raise InvalidValue(f"firms[{k}].name", f"duplicate firm {name!r}")
        firm_names[name] = k
        acts = f["activities"]
        if not isinstance(acts, list) or not acts:
            raise InvalidValue(f"firms[{k}].activities", "expected a nonempty list")
        firms.append(Firm([_good_vector(reg, a, f"firms[{k}].activities") for a in acts]))
    hh_raw = payload["households"]
    if not isinstance(hh_raw, list) or not hh_raw:
        raise InvalidValue("households", "expected a nonempty list")
    households = []
    for k, h in enumerate(hh_raw):
        where = f"households[{k}]"
        _check_keys(h, where, ("endowment", "weights"), ("shares", "name"))
        shares = {}
        for fname, s in h.get("shares", {}).items():
            if fname not in firm_names:
                raise InvalidValue(f"{where}.shares", f"unknown firm {fname!r}")
            shares[firm_names[fname]] = _number(s, f"{where}.shares.{fname}")
        try:
            households.append(Household(
                _good_vector(reg, h["endowment"], f"{where}.endowment"),
                _good_vector(reg, h["weights"], f"{where}.weights"),
                shares,
            ))
        except ScenarioError:
            raise
        except MarketError as exc:
            raise InvalidValue(where, str(exc)) from None
    try:
        economy = Economy(reg, tuple(households), tuple(firms))
    except MarketError as exc:
        raise InvalidValue("payload", str(exc)) from None
    options: dict[str, Any] = {
        "tol": _number(payload.get("tol", 1e-10), "tol"),
        "max_iter": int(_number(payload.get("max_iter", 100_000), "max_iter")),
        "damping": _number(payload.get("damping", 0.5), "damping"),
        "p0": None if "p0" not in payload else _good_vector(reg, payload["p0"], "p0"),
    }
    return economy, options


def _build_simulation(reg: GoodsRegistry, payload: dict, seed: int) -> tuple[SimConfig, dict]:
    _check_keys(payload, "payload", ("agents",), (
        "ticks", "learning_rate", "max_trade", "base_prices", "belief_noise",
        "track_pairs", "curvature_every", "curvature_samples", "curvature_max_len",
        "death_after"))
    agents_raw = payload["agents"]
    if not isinstance(agents_raw, list):
        raise InvalidValue("agents", "expected a list")
    specs = []
    for k, a in enumerate(agents_raw):
        where = f"agents[{k}]"
        _check_keys(a, where, ("inventory",),
                    ("id", "beliefs", "production", "needs", "units"))
        specs.append(AgentSpec(
            id=str(a.get("id", f"agent{k}")),
            inventory=_good_vector(reg, a["inventory"], f"{where}.inventory"),
            beliefs=None if "beliefs" not in a else _good_matrix(reg, a["beliefs"], f"{where}.beliefs"),
            production=None if "production" not in a else _good_vector(reg, a["production"], f"{where}.production"),
            needs=None if "needs" not in a else _good_vector(reg, a["needs"], f"{where}.needs"),
            units=None if "units" not in a else _good_vector(reg, a["units"], f"{where}.units", 1.0),
        ))
    pairs = payload.get("track_pairs", [[reg.goods[0], reg.goods[1]]] if reg.n >= 2 else [])
    if not isinstance(pairs, list) or any(not isinstance(p, list) or len(p) != 2 for p in pairs):
        raise InvalidValue("track_pairs", "expected a list of [good, good] pairs")
    cfg = SimConfig(
        goods=reg.goods,
        agents=tuple(specs),
        seed=seed,
        ticks=int(_number(payload.get("ticks", 100), "ticks")),
        learning_rate=_number(payload.get("learning_rate", 0.2), "learning_rate"),
        max_trade=_number(payload.get("max_trade", 1.0), "max_trade"),
        base_prices=None if "base_prices" not in payload else tuple(
            _good_vector(reg, payload["base_prices"], "base_prices", 1.0)),
        belief_noise=_number(payload.get("belief_noise", 0.0), "belief_noise"),
        track_pairs=tuple((_good_index(reg, a), _good_index(reg, b)) for a, b in pairs),
        curvature_every=int(_number(payload.get("curvature_every", 0), "curvature_every")),
        curvature_samples=int(_number(payload.get("curvature_samples", 100), "curvature_samples")),
        curvature_max_len=int(_number(payload.get("curvature_max_len", 3), "curvature_max_len")),
        death_after=None if payload.get("death_after") is None else int(
            _number(payload["death_after"], "death_after")),
    )
    try:
        cfg.validate()
    except MarketError as exc:
        raise InvalidValue(getattr(exc, "field", "payload"), str(exc)) from None
    return cfg, {}


def _build_holonomy(reg: GoodsRegistry, payload: dict, base_dir: Path) -> tuple[EconomicHistory, dict]:
    _check_keys(payload, "payload", (), ("history", "samples", "rescale", "plaquette"))
    if ("history" in payload) == ("samples" in payload):
        raise MissingField("history")
    try:
        if "history" in payload:
            h = read_history_csv(base_dir / str(payload["history"]))
        else:
            samples = payload["samples"]
            if not isinstance(samples, list) or not samples:
                raise InvalidValue("samples", "expected a nonempty list")
            rows = [_check_keys(s, f"samples[{k}]", ("t", "q", "p")) for k, s in enumerate(samples)]
            h = EconomicHistory(
                [_number(s["t"], "samples.t") for s in rows],
                [_good_vector(reg, s["q"], "samples.q") for s in rows],
                [_good_vector(reg, s["p"], "samples.p") for s in rows],
            )
    except ScenarioError:
        raise
    except (MarketError, OSError) as exc:
        raise InvalidValue("history", str(exc)) from None
    if h.n_goods != reg.n:
        raise InvalidValue("history", f"history has {h.n_goods} goods, scenario declares {reg.n}")
    options: dict[str, Any] = {}
    if "rescale" in payload:
        scale = payload["rescale"]
        if not isinstance(scale, list) or len(scale) != len(h):
            raise InvalidValue("rescale", "need one factor per history sample")
        options["rescale"] = [_number(x, "rescale") for x in scale]
    if "plaquette" in payload:
        pq = _check_keys(payload["plaquette"], "plaquette", ("q", "p", "eps", "delta", "axes"))
        axes = pq["axes"]
        if not isinstance(axes, list) or len(axes) != 2:
            raise InvalidValue("plaquette.axes", "expected [good for dq, good for dp]")
        options["plaquette"] = {
            "q": _good_vector(reg, pq["q"], "plaquette.q"),
            "p": _good_vector(reg, pq["p"], "plaquette.p"),
            "eps": _number(pq["eps"], "plaquette.eps"),
            "delta": _number(pq["delta"], "plaquette.delta"),
            "axes": (_good_index(reg, axes[0]), _good_index(reg, axes[1])),
        }
    return h, options


def _build_arbitrage(reg: GoodsRegistry, payload: dict) -> tuple[np.ndarray, dict]:
    _check_keys(payload, "payload", ("agents",), ("max_len", "tol"))
    agents = payload["agents"]
    if not isinstance(agents, list) or not agents:
        raise InvalidValue("agents", "expected a nonempty list")
    ids, mats = [], []
    for k, a in enumerate(agents):
        _check_keys(a, f"agents[{k}]", ("quotes",), ("id",))
        ids.append(str(a.get("id", f"agent{k}")))
        mats.append(_good_matrix(reg, a["quotes"], f"agents[{k}].quotes"))
    options = {
        "ids": ids,
        "max_len": int(_number(payload.get("max_len", 4), "max_len")),
        "tol": _number(payload.get("tol", 1e-9), "tol"),
    }
    return np.array(mats), options


def _build_pareto(reg: GoodsRegistry, payload: dict) -> tuple[DiscreteScenario, dict]:
    _check_keys(payload, "payload", ("supplies", "agents"), ("utility",))
    supplies = _good_vector(reg, payload["supplies"], "supplies")
    if np.any(supplies < 0) or np.any(supplies != np.round(supplies)):
        raise InvalidValue("supplies", "supplies must be nonnegative integers")

    def utility(spec: Any, where: str):
        _check_keys(spec, where, ("type",), ("cap", "weights"))
        if spec["type"] != "capped_total":
            raise InvalidValue(f"{where}.type", "only 'capped_total' utilities are supported")
        weights = None if "weights" not in spec else tuple(
            _good_vector(reg, spec["weights"], f"{where}.weights"))
        return capped_total(_number(spec.get("cap", math.inf), f"{where}.cap"), weights)

    agents = payload["agents"]
    if isinstance(agents, int) and not isinstance(agents, bool):
        if agents < 1:
            raise InvalidValue("agents", "need at least one agent")
        shared = payload.get("utility", {"type": "capped_total", "cap": 1})
        utilities = tuple(utility(shared, "utility") for _ in range(agents))
    elif isinstance(agents, list) and agents:
        utilities = tuple(utility(u, f"agents[{k}]") for k, u in enumerate(agents))
    else:
        raise InvalidValue("agents", "expected an agent count or a list of utilities")
    return DiscreteScenario(tuple(int(s) for s in supplies), utilities, reg.goods), {}


def load_scenario(data: Mapping[str, Any], base_dir: Path = Path("."),
                  seed: int | None = None) -> Scenario:
    """Validate an already-decoded scenario object; ``seed`` overrides the file's seed."""
    _check_keys(data, "", ("kind", "goods", "payload"), ("seed", "outputs", "description"))
    kind = data["kind"]
    if kind not in KINDS:
        raise InvalidValue("kind", f"must be one of {', '.join(KINDS)}")
    goods = data["goods"]
    if not isinstance(goods, list) or not goods or not all(isinstance(g, str) for g in goods):
        raise InvalidValue("goods", "expected a nonempty list of names")
    try:
        reg = GoodsRegistry(goods)
    except ValueError as exc:
        raise InvalidValue("goods", str(exc)) from None
    if seed is None:
        raw_seed = data.get("seed", 0)
        if isinstance(raw_seed, bool) or not isinstance(raw_seed, int):
            raise InvalidValue("seed", "expected an integer")
        seed = raw_seed
    outputs = dict(DEFAULT_OUTPUTS[kind])
    raw_out = data.get("outputs", {})
    _check_keys(raw_out, "outputs", (), tuple(outputs))
    outputs.update({k: str(v) for k, v in raw_out.items()})
    payload = data["payload"]
    if kind == "equilibrium":
        model, options = _build_equilibrium(reg, payload)
    elif kind == "simulation":
        model, options = _build_simulation(reg, payload, seed)
    elif kind == "holonomy":
        model, options = _build_holonomy(reg, payload, base_dir)
    elif kind == "arbitrage":
        model, options = _build_arbitrage(reg, payload)
    else:
        model, options = _build_pareto(reg, payload)
    return Scenario(kind, reg, seed, outputs, payload, model, options, base_dir)


def parse_scenario(path: str | Path, seed: int | None = None) -> Scenario:
    """Read and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno) from None
    return load_scenario(data, path.parent, seed)
