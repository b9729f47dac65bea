"""Path holonomy of the connection ``A = q.dp / q.p`` along economic histories.

A history is a piecewise-linear curve of (basket ``q``, prices ``p``)
samples. Each segment contributes ``ln(qbar.p1 / qbar.p0)`` with ``qbar``
the segment-midpoint basket. This is exact whenever the basket is constant
on the segment and second-order accurate otherwise. The exponential of the
summed contributions is the Divisia index of the history.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionMismatch, InvalidHistory, ZeroValue, ZeroValueCrossing


@dataclass(frozen=True, eq=False)
class EconomicHistory:
    t: NDArray[np.float64]
    q: NDArray[np.float64]
    p: NDArray[np.float64]

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        q = np.array(self.q, dtype=float)
        p = np.array(self.p, dtype=float)
        if q.ndim != 2 or q.shape != p.shape or t.shape != (q.shape[0],):
            raise DimensionMismatch(f"inconsistent shapes t{t.shape} q{q.shape} p{p.shape}")
        if len(t) < 1:
            raise InvalidHistory("a history needs at least one sample")
        if np.any(np.diff(t) <= 0):
            raise InvalidHistory("sample times must be strictly increasing")
        if np.any(np.einsum("ka,ka->k", q, p) <= 0):
            raise InvalidHistory("basket value q.p must stay positive")
        for arr in (t, q, p):
            arr.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_points(cls, points: Sequence[tuple[ArrayLike, ArrayLike]],
                    t: ArrayLike | None = None) -> EconomicHistory:
        """History through ``(q, p)`` points, evenly timed on [0, 1] unless ``t`` is given."""
        q = np.array([pt[0] for pt in points], dtype=float)
        p = np.array([pt[1] for pt in points], dtype=float)
        if t is None:
            t = np.linspace(0.0, 1.0, len(points)) if len(points) > 1 else np.zeros(1)
        return cls(t, q, p)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def n_goods(self) -> int:
        return self.q.shape[1]

    def reversed(self) -> EconomicHistory:
        return EconomicHistory(self.t[0] + self.t[-1] - self.t[::-1], self.q[::-1], self.p[::-1])

    def then(self, other: EconomicHistory) -> EconomicHistory:
        """Concatenation; ``other`` must start where this history ends."""
        if not (np.array_equal(self.q[-1], other.q[0]) and np.array_equal(self.p[-1], other.p[0])):
            raise InvalidHistory("histories do not join")
        shift = self.t[-1] - other.t[0]
        return EconomicHistory(
            np.concatenate([self.t, other.t[1:] + shift]),
            np.vstack([self.q, other.q[1:]]),
            np.vstack([self.p, other.p[1:]]),
        )

    def rescaled(self, scale: ArrayLike) -> EconomicHistory:
        """Prices multiplied by a positive time-dependent factor sampled at each time."""
        scale = np.asarray(scale, dtype=float)
        if scale.shape != self.t.shape or np.any(scale <= 0):
            raise ValueError("need one positive scale factor per sample")
        return EconomicHistory(self.t, self.q, self.p * scale[:, None])


def segment_connection(q0: ArrayLike, p0: ArrayLike, q1: ArrayLike, p1: ArrayLike) -> float:
    """Integral of ``q.dp / q.p`` along the straight segment, midpoint-basket rule."""
    q0, p0, q1, p1 = (np.asarray(x, dtype=float) for x in (q0, p0, q1, p1))
    qbar = 0.5 * (q0 + q1)
    v0 = float(qbar @ p0)
    v1 = float(qbar @ p1)
    ends = (float(q0 @ p0), float(q1 @ p1), v0, v1)
    if not (all(v > 0 for v in ends) or all(v < 0 for v in ends)):
        raise ZeroValueCrossing(f"basket value changes sign or vanishes on segment: {ends}")
    # log1p keeps small price moves accurate; dp = 0 gives exactly 0
    return math.log1p(float(qbar @ (p1 - p0)) / v0)


def log_holonomy(h: EconomicHistory) -> float:
    """``ln P``: the summed connection over all segments."""
    return math.fsum(
        segment_connection(h.q[k], h.p[k], h.q[k + 1], h.p[k + 1]) for k in range(len(h) - 1)
    )


def path_holonomy(h: EconomicHistory) -> float:
    """Divisia index ``P = exp(integral of A)`` of the history."""
    return math.exp(log_holonomy(h))


def holonomy_covariance_check(
    h: EconomicHistory, scale: ArrayLike | Callable[[NDArray[np.float64]], ArrayLike]
) -> tuple[float, float]:
    """``(P, P')`` where ``P'`` is computed after rescaling prices by ``scale(t)``.

    ``P' / P`` equals ``scale(t_end) / scale(t_start)``.
    """
    factors = scale(h.t) if callable(scale) else scale
    return path_holonomy(h), path_holonomy(h.rescaled(factors))


class TangentPair(NamedTuple):
    dq: NDArray[np.float64]
    dp: NDArray[np.float64]


def _bracket(q: NDArray[np.float64], p: NDArray[np.float64],
             dq: NDArray[np.float64], dp: NDArray[np.float64]) -> float:
    value = float(q @ p)
    if value == 0:
        raise ZeroValue("curvature undefined where q.p = 0")
    return (float(dq @ dp) - float(q @ dp) * float(p @ dq) / value) / value


def curvature_form_F(q: ArrayLike, p: ArrayLike, u: TangentPair,
                     v: TangentPair | None = None) -> float:
    """Curvature two-form ``(1/q.p)[delta^a_b - q^a p_b / q.p] dq^b ^ dp_a``.

    With a single pair ``u = (dq, dp)`` this is the form on the bivector
    ``(dq, 0) ^ (0, dp)``, sign +. With two general tangents it is the
    antisymmetrized evaluation ``M(u.dq, v.dp) - M(v.dq, u.dp)``.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    udq, udp = (np.asarray(x, dtype=float) for x in u)
    if q.shape != p.shape or udq.shape != q.shape or udp.shape != q.shape:
        raise DimensionMismatch("q, p and tangents must share one length")
    if v is None:
        return _bracket(q, p, udq, udp)
    vdq, vdp = (np.asarray(x, dtype=float) for x in v)
    return _bracket(q, p, udq, vdp) - _bracket(q, p, vdq, udp)


class PlaquetteResult(NamedTuple):
    log_holonomy: float
    curvature: float
    defect: float


def plaquette_loop(q: ArrayLike, p: ArrayLike, eps: float, delta: float,
                   axes: tuple[int, int]) -> EconomicHistory:
    """Rectangle: basket along good ``axes[0]``, prices along ``axes[1]``, then back."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    b, a = axes
    dq = np.zeros_like(q)
    dq[b] = eps
    dp = np.zeros_like(p)
    dp[a] = delta
    pts = [(q, p), (q + dq, p), (q + dq, p + dp), (q, p + dp), (q, p)]
    return EconomicHistory.from_points(pts)


def plaquette_check(q: ArrayLike, p: ArrayLike, eps: float, delta: float,
                    axes: tuple[int, int] = (0, 1)) -> PlaquetteResult:
    """Compare the holonomy of a small rectangular loop with the enclosed curvature.

    The curvature is evaluated at the centre of the rectangle (midpoint rule
    for the enclosed flux), so the defect shrinks like the fourth power of
    the loop size.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if eps == 0 or delta == 0:
        return PlaquetteResult(0.0, 0.0, 0.0)
    lnp = log_holonomy(plaquette_loop(q, p, eps, delta, axes))
    b, a = axes
    dq = np.zeros_like(q)
    dq[b] = eps
    dp = np.zeros_like(p)
    dp[a] = delta
    f = curvature_form_F(q + 0.5 * dq, p + 0.5 * dp, TangentPair(dq, dp))
    return PlaquetteResult(lnp, f, abs(lnp - f))


def read_history_csv(path: str | Path) -> EconomicHistory:
    """Load ``t, q_1..q_N, p_1..p_N`` columns; the header row is required."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidHistory(f"{path}: empty file") from None
        n, rem = divmod(len(header) - 1, 2)
        expected = ["t"] + [f"q_{k}" for k in range(1, n + 1)] + [f"p_{k}" for k in range(1, n + 1)]
        if rem or n < 1 or header != expected:
            raise InvalidHistory(f"{path}: header must be {','.join(expected) or 't,q_1,...,p_1,...'}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                raise InvalidHistory(f"{path}:{lineno}: non-numeric value") from None
            if len(rows[-1]) != len(header):
                raise InvalidHistory(f"{path}:{lineno}: expected {len(header)} columns")
    if not rows:
        raise InvalidHistory(f"{path}: no samples")
    data = np.array(rows)
    return EconomicHistory(data[:, 0], data[:, 1:n + 1], data[:, n + 1:])


def write_history_csv(h: EconomicHistory, path: str | Path) -> None:
    n = h.n_goods
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"q_{k}" for k in range(1, n + 1)] + [f"p_{k}" for k in range(1, n + 1)])
        for k in range(len(h)):
            w.writerow([repr(float(x)) for x in (h.t[k], *h.q[k], *h.p[k])])
