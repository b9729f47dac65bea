"""What-by-what matrices, trade ratios and cycle curvatures.

A what-by-what matrix ``W`` is an ``N x N`` float array in which
``W[a, b]`` is how many units of ``a`` the agent considers one unit of
``b`` worth. Unknown entries (the agent has no view) are ``NaN``; use
:data:`UNKNOWN` when building matrices by hand.

A consistent complete matrix is ``W[a, b] = P[b] / P[a]`` for a positive
price vector ``P``. Under a change of price units ``P[a] -> phi[a] P[a]``
it transforms as ``W[a, b] -> W[a, b] * phi[b] / phi[a]``. Rescaling the
agent's *quantity* units by ``phi`` is the dual action, i.e. the same
transform with ``1/phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    DimensionMismatch,
    GoodChainMismatch,
    IncompleteMatrix,
    InconsistentMatrix,
    MissingLocalValuation,
    NonPositiveGauge,
    OpenCycle,
    ZeroQuantity,
)

UNKNOWN = float("nan")
CONSISTENCY_TOL = 1e-9


def as_wbw(w: ArrayLike) -> NDArray[np.float64]:
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DimensionMismatch(f"what-by-what matrix must be square, got {w.shape}")
    known = ~np.isnan(w)
    if np.any(w[known] <= 0):
        raise ValueError("known what-by-what entries must be positive")
    diag = np.diag(w)
    if np.any(diag[~np.isnan(diag)] != 1.0):
        raise ValueError("known diagonal entries must equal 1")
    return w


def wbw_from_prices(prices: ArrayLike) -> NDArray[np.float64]:
    """The consistent matrix ``W[a, b] = P[b] / P[a]``."""
    p = np.asarray(prices, dtype=float)
    if p.ndim != 1 or np.any(p <= 0):
        raise ValueError("prices must be a positive 1-d vector")
    w = p[None, :] / p[:, None]
    np.fill_diagonal(w, 1.0)
    return w


def wbw_is_complete(w: ArrayLike) -> bool:
    return not bool(np.any(np.isnan(as_wbw(w))))


def wbw_is_consistent(w: ArrayLike, tol: float = CONSISTENCY_TOL) -> bool:
    """Reciprocity and transitivity over every known entry, to relative ``tol``.

    Triples with an unknown entry are skipped, so an incomplete matrix is
    consistent as long as nothing it does state contradicts itself.
    """
    w = as_wbw(w)
    recip = w * w.T
    known = ~np.isnan(recip)
    if np.any(np.abs(recip[known] - 1.0) > tol):
        return False
    # chain[a, c, b] = W[a, c] W[c, b], compared with W[a, b]
    chain = w[:, :, None] * w[None, :, :]
    direct = np.broadcast_to(w[:, None, :], chain.shape)
    known = ~np.isnan(chain) & ~np.isnan(direct)
    diff = np.abs(chain[known] - direct[known])
    return bool(np.all(diff <= tol * direct[known]))


def _require_complete(w: NDArray[np.float64]) -> None:
    if np.any(np.isnan(w)):
        raise IncompleteMatrix("operation needs a complete what-by-what matrix")


def wbw_extract_prices(w: ArrayLike, numeraire: int = 0,
                       tol: float = CONSISTENCY_TOL) -> NDArray[np.float64]:
    """Prices in units of ``numeraire``: ``P[b] = W[numeraire, b]``."""
    w = as_wbw(w)
    _require_complete(w)
    if not wbw_is_consistent(w, tol):
        raise InconsistentMatrix("matrix is not reciprocal/transitive within tolerance")
    return w[numeraire].copy()


def wbw_projection_defect(w: ArrayLike) -> float:
    """``max |sum_b W[a,b] W[b,c] - N W[a,c]|``; zero for reciprocal matrices."""
    w = as_wbw(w)
    _require_complete(w)
    return float(np.max(np.abs(w @ w - w.shape[0] * w)))


def wbw_valuation(w: ArrayLike, v: ArrayLike) -> NDArray[np.float64]:
    """``I^b = sum_a W[a, b] V^a``, contracted exactly as written in the source formula.

    Note the index order: with ``W[a, b] = P[b]/P[a]`` this weights each
    holding by ``P[b]/P[a]`` rather than ``P[a]/P[b]``.
    """
    w = as_wbw(w)
    _require_complete(w)
    v = np.asarray(v, dtype=float)
    if v.shape != (w.shape[0],):
        raise DimensionMismatch(f"inventory row {v.shape} does not match {w.shape}")
    # zero entries (good not held) are allowed so unit rows pick out one holding
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValueError("inventory row must be finite and nonnegative")
    return v @ w


def wbw_gauge_transform(w: ArrayLike, phi: ArrayLike) -> NDArray[np.float64]:
    """``W[a, b] -> W[a, b] phi[b] / phi[a]``; unknown entries stay unknown."""
    w = as_wbw(w)
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (w.shape[0],):
        raise DimensionMismatch(f"gauge row {phi.shape} does not match {w.shape}")
    if np.any(phi <= 0) or not np.all(np.isfinite(phi)):
        raise NonPositiveGauge("gauge factors must be positive")
    out = w * phi[None, :] / phi[:, None]
    # keep the diagonal exactly 1 rather than phi/phi rounded
    idx = np.arange(w.shape[0])
    out[idx, idx] = np.where(np.isnan(w[idx, idx]), np.nan, 1.0)
    return out


@dataclass(frozen=True)
class TradeOp:
    """One bilateral exchange, linking node ``(giver, good_a)`` to ``(receiver, good_b)``.

    ``n_a_i`` units of ``good_a`` (counted in the giver's units) are matched
    against ``n_b_j`` units of ``good_b`` (counted in the receiver's units).
    ``n_b_i`` is the same ``good_b`` quantity in the giver's units (needed
    for the local ratio) and ``n_a_j`` the ``good_a`` quantity in the
    receiver's units.
    """

    giver: int
    receiver: int
    good_a: int
    good_b: int
    n_a_i: float
    n_b_j: float
    n_b_i: float | None = None
    n_a_j: float | None = None
    tick: int = 0

    def __post_init__(self):
        for name in ("n_a_i", "n_b_j", "n_b_i", "n_a_j"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ZeroQuantity(f"{name} must be positive, got {value}")

    def gauge(self, phi: ArrayLike) -> TradeOp:
        """The same trade recorded after rescaling quantity units by ``phi[agent, good]``."""
        phi = np.asarray(getattr(phi, "factors", phi), dtype=float)
        i, j, a, b = self.giver, self.receiver, self.good_a, self.good_b
        return replace(
            self,
            n_a_i=self.n_a_i * phi[i, a],
            n_b_j=self.n_b_j * phi[j, b],
            n_b_i=None if self.n_b_i is None else self.n_b_i * phi[i, b],
            n_a_j=None if self.n_a_j is None else self.n_a_j * phi[j, a],
        )


def trade_ratio_O(t: TradeOp) -> float:
    """``n_b_j / n_a_i``, a connection between ``(i, a)`` and ``(j, b)``."""
    return t.n_b_j / t.n_a_i


def local_ratio_Q(t: TradeOp) -> float:
    """``n_b_i / n_a_i``, both quantities in the giver's units."""
    if t.n_b_i is None:
        raise MissingLocalValuation("trade has no giver-side valuation of good_b")
    return t.n_b_i / t.n_a_i


@dataclass(frozen=True)
class CycleCurvature:
    """Product of trade ratios around a closed cycle of agents.

    ``goods`` lists the chain ``a -> b -> ... -> d`` so it is one longer than
    ``agents``. ``value`` is a scalar for a single chain, or a vector of
    diagonal entries / a full matrix when built from operation matrices.
    """

    kind: Literal["R", "S"]
    agents: tuple[int, ...]
    goods: tuple[int, ...]
    value: float | NDArray[np.float64]

    @property
    def is_diagonal(self) -> bool:
        return len(self.goods) > 0 and self.goods[0] == self.goods[-1]

    def trace(self) -> float:
        v = np.asarray(self.value, dtype=float)
        if v.ndim == 2:
            return float(np.trace(v))
        return float(np.sum(v))


def cycle_curvature(kind: Literal["R", "S"], ops: Sequence[TradeOp]) -> CycleCurvature:
    """``R`` (product of O ratios) or ``S`` (product of Q ratios) around ``ops``.

    Consecutive operations must chain: the receiver and ``good_b`` of one are
    the giver and ``good_a`` of the next, and the last receiver is the first
    giver. When the goods also close up the result is a diagonal element.
    """
    if kind not in ("R", "S"):
        raise ValueError(f"kind must be 'R' or 'S', got {kind!r}")
    ops = list(ops)
    if not ops:
        raise OpenCycle("empty cycle")
    for k, (cur, nxt) in enumerate(zip(ops, ops[1:])):
        if cur.receiver != nxt.giver:
            raise OpenCycle(f"op {k} ends at agent {cur.receiver}, op {k+1} starts at {nxt.giver}")
        if cur.good_b != nxt.good_a:
            raise GoodChainMismatch(f"op {k} delivers good {cur.good_b}, op {k+1} takes {nxt.good_a}")
    if ops[-1].receiver != ops[0].giver:
        raise OpenCycle("last operation does not return to the first agent")
    ratio = trade_ratio_O if kind == "R" else local_ratio_Q
    value = math.prod(ratio(t) for t in ops)
    return CycleCurvature(
        kind=kind,
        agents=tuple(t.giver for t in ops),
        goods=(ops[0].good_a,) + tuple(t.good_b for t in ops),
        value=value,
    )


def operation_matrix(ops: Sequence[TradeOp], i: int, j: int, n_goods: int,
                     kind: Literal["R", "S"] = "R") -> NDArray[np.float64]:
    """``N x N`` matrix of ratios for trades from ``i`` to ``j``.

    Entry ``[a, b]`` is the geometric mean of the matching ratios; pairs of
    goods never traded are 0 (they contribute nothing to a trace).
    """
    ratio = trade_ratio_O if kind == "R" else local_ratio_Q
    logs: dict[tuple[int, int], list[float]] = {}
    for t in ops:
        if t.giver == i and t.receiver == j:
            logs.setdefault((t.good_a, t.good_b), []).append(math.log(ratio(t)))
    out = np.zeros((n_goods, n_goods))
    for (a, b), vals in logs.items():
        out[a, b] = math.exp(math.fsum(vals) / len(vals))
    return out


def curvature_matrix(kind: Literal["R", "S"], agents: Sequence[int],
                     matrices: Sequence[ArrayLike]) -> CycleCurvature:
    """Chained product of operation matrices around an agent cycle.

    ``matrices[k]`` links ``agents[k]`` to ``agents[k+1]`` (cyclically). The
    intermediate goods are summed over, and the diagonal of the result is
    unchanged by any per-agent, per-good rescaling.
    """
    mats = [np.asarray(m, dtype=float) for m in matrices]
    if len(mats) != len(agents) or not mats:
        raise OpenCycle("need one operation matrix per hop of the cycle")
    out = mats[0]
    for m in mats[1:]:
        out = out @ m
    return CycleCurvature(kind=kind, agents=tuple(agents), goods=(), value=out)


def action_trade(w_i: ArrayLike, o_ij: ArrayLike, w_j: ArrayLike, o_ji: ArrayLike) -> float:
    """Bilateral action term ``sum_abcd W_i[a,b] O_ij[b,c] W_j[c,d] O_ji[d,a]``."""
    mats = [np.asarray(m, dtype=float) for m in (w_i, o_ij, w_j, o_ji)]
    shape = mats[0].shape
    if any(m.shape != shape for m in mats) or len(shape) != 2 or shape[0] != shape[1]:
        raise DimensionMismatch("all four factors must be square and equally sized")
    if any(np.any(np.isnan(m)) for m in mats):
        raise IncompleteMatrix("action_trade needs complete matrices")
    return float(np.trace(mats[0] @ mats[1] @ mats[2] @ mats[3]))


def total_trade_action(beliefs: Sequence[ArrayLike], op_mats: dict[tuple[int, int], ArrayLike]) -> float:
    """Sum of :func:`action_trade` over ordered agent pairs ``i != j`` with operations both ways."""
    total = 0.0
    for (i, j), o_ij in sorted(op_mats.items()):
        if i == j or (j, i) not in op_mats:
            continue
        total += action_trade(beliefs[i], o_ij, beliefs[j], op_mats[(j, i)])
    return total


def action_cycles(cycles: Sequence[CycleCurvature], alpha_r: float, alpha_s: float) -> float:
    """``sum over cycles of alpha_R Tr R + alpha_S Tr S``."""
    total = 0.0
    for c in cycles:
        coeff = alpha_r if c.kind == "R" else alpha_s
        if coeff:
            total += coeff * c.trace()
    return total
