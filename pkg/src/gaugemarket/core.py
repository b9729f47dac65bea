"""Goods, prices, inventories and the abelian rescaling group acting on them.

Prices are plain 1-d float arrays and inventories plain 2-d arrays of shape
``(agents, goods)``. Nothing is normalized behind the caller's back: use
:func:`normalize_prices` when a point on the simplex is wanted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import AllZeroPrices, DimensionMismatch, NonPositiveEntry, NonPositiveGauge

ATOL = 1e-12


@dataclass(frozen=True)
class GoodsRegistry:
    """Ordered set of opaque good identifiers."""

    goods: tuple[str, ...]

    def __init__(self, goods: Iterable[str]):
        goods = tuple(goods)
        if not goods:
            raise ValueError("a goods registry needs at least one good")
        if len(set(goods)) != len(goods):
            raise ValueError(f"duplicate good identifiers in {goods}")
        object.__setattr__(self, "goods", goods)

    @property
    def n(self) -> int:
        return len(self.goods)

    def __len__(self) -> int:
        return len(self.goods)

    def __contains__(self, good: object) -> bool:
        return good in self.goods

    def index(self, good: str) -> int:
        try:
            return self.goods.index(good)
        except ValueError:
            raise KeyError(good) from None

    def name(self, index: int) -> str:
        return self.goods[index]

    def vector(self, values: dict[str, float], default: float = 0.0) -> NDArray[np.float64]:
        """Dense vector from a ``{good: value}`` mapping."""
        out = np.full(self.n, default, dtype=float)
        for good, value in values.items():
            out[self.index(good)] = value
        return out


def as_prices(p: ArrayLike) -> NDArray[np.float64]:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"price vector must be 1-d, got shape {arr.shape}")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("prices must be finite and nonnegative")
    return arr


def normalize_prices(p: ArrayLike) -> NDArray[np.float64]:
    """Rescale ``p`` onto the unit simplex."""
    arr = as_prices(p)
    total = math.fsum(arr)
    if total <= 0:
        raise AllZeroPrices("cannot normalize an all-zero price vector")
    out = arr / total
    # Drive the correctly rounded sum to exactly 1.0; dividing by 1.0 is then a
    # no-op, which makes the map idempotent bit-for-bit.
    for _ in range(4):
        s = math.fsum(out)
        if s == 1.0:
            return out
        out = out / s
    k = int(np.argmax(out))
    while (s := math.fsum(out)) != 1.0:
        out[k] += 1.0 - s
    return out


def contract_value(p: ArrayLike, x: ArrayLike) -> float:
    """Value ``p_a X^a`` of a quantity vector at prices ``p``."""
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    if p.shape != x.shape or p.ndim != 1:
        raise DimensionMismatch(f"shapes {p.shape} and {x.shape} do not contract")
    return float(p @ x)


def _positive(arr: ArrayLike, exc: type[Exception], what: str) -> NDArray[np.float64]:
    arr = np.asarray(arr, dtype=float)
    if not np.all(arr > 0) or not np.all(np.isfinite(arr)):
        raise exc(f"{what} must be finite and strictly positive")
    return arr


@dataclass(frozen=True, eq=False)
class GaugeElement:
    """Per-agent, per-good positive rescaling factors.

    Composition is the entrywise product and the inverse the entrywise
    reciprocal, so the group is ``(R+)^(P*N)``.
    """

    factors: NDArray[np.float64]

    def __post_init__(self):
        arr = _positive(self.factors, NonPositiveGauge, "gauge factors")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "factors", arr)

    @classmethod
    def identity(cls, shape: int | Sequence[int]) -> GaugeElement:
        return cls(np.ones(shape))

    @classmethod
    def constant(cls, shape: int | Sequence[int], scale: float) -> GaugeElement:
        """The global rescaling ``p -> scale * p`` as a gauge element."""
        return cls(np.full(shape, float(scale)))

    @classmethod
    def random(cls, shape: int | Sequence[int], rng: np.random.Generator,
               log_sd: float = 1.0) -> GaugeElement:
        return cls(np.exp(rng.normal(0.0, log_sd, size=shape)))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.factors.shape

    def __mul__(self, other: GaugeElement) -> GaugeElement:
        if not isinstance(other, GaugeElement):
            return NotImplemented
        if other.shape != self.shape:
            raise DimensionMismatch(f"gauge shapes {self.shape} and {other.shape} differ")
        return GaugeElement(self.factors * other.factors)

    def inverse(self) -> GaugeElement:
        return GaugeElement(1.0 / self.factors)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GaugeElement):
            return NotImplemented
        return self.shape == other.shape and bool(np.all(self.factors == other.factors))

    __hash__ = None  # type: ignore[assignment]


def as_inventory(v: ArrayLike) -> NDArray[np.float64]:
    """Dense inventory matrix; every entry must be strictly positive."""
    return _positive(v, NonPositiveEntry, "inventory entries")


def apply_gauge(v: ArrayLike, phi: GaugeElement | ArrayLike) -> NDArray[np.float64]:
    """Entrywise ``phi_i^a V_i^a``."""
    factors = phi.factors if isinstance(phi, GaugeElement) else _positive(
        phi, NonPositiveGauge, "gauge factors")
    v = np.asarray(v, dtype=float)
    if v.shape != factors.shape:
        raise DimensionMismatch(f"inventory shape {v.shape} != gauge shape {factors.shape}")
    return factors * v


def adjoint(v: ArrayLike) -> NDArray[np.float64]:
    """Entrywise reciprocal, the natural adjoint on ``(R+)^n``."""
    return 1.0 / as_inventory(v)


def gauge_norm(v: ArrayLike) -> float:
    """Squared invariant norm ``sum (V*) V``, which is the entry count ``N*P``."""
    v = as_inventory(v)
    total = float(np.sum(adjoint(v) * v))
    # each term is 1 to within an ulp, so the sum rounds to the count
    return float(round(total))
