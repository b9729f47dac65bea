"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MarketError(Exception):
    """Base class for all errors raised by gaugemarket."""


class AllZeroPrices(MarketError, ValueError):
    pass


class DimensionMismatch(MarketError, ValueError):
    pass


# the equilibrium module talks about households/firms rather than vectors
ShapeMismatch = DimensionMismatch


class NonPositiveGauge(MarketError, ValueError):
    pass


class NonPositiveEntry(MarketError, ValueError):
    pass


class ZeroPriceDemandedGood(MarketError, ValueError):
    def __init__(self, good: int):
        super().__init__(f"good {good} has zero price but positive demand weight")
        self.good = good


class InvalidEconomy(MarketError, ValueError):
    pass


class DegenerateEconomy(MarketError, ValueError):
    pass


class NoConvergence(MarketError, RuntimeError):
    """Raised by the tatonnement solver when the iteration budget runs out.

    ``trace`` holds the last (at most ten) residuals so callers can tell a
    slow approach from an oscillation.
    """

    def __init__(self, iterations: int, trace: list[float]):
        super().__init__(
            f"no convergence after {iterations} iterations; "
            f"last residuals {trace}"
        )
        self.iterations = iterations
        self.trace = list(trace)


class ScenarioTooLarge(MarketError, ValueError):
    pass


class IncompleteMatrix(MarketError, ValueError):
    pass


class InconsistentMatrix(MarketError, ValueError):
    pass


class ZeroQuantity(MarketError, ValueError):
    pass


class MissingLocalValuation(MarketError, ValueError):
    pass


class OpenCycle(MarketError, ValueError):
    pass


class GoodChainMismatch(MarketError, ValueError):
    pass


class ZeroValueCrossing(MarketError, ValueError):
    """A history segment touches or crosses the zero-value set q.p = 0."""


class ZeroValue(MarketError, ValueError):
    pass


class InvalidHistory(MarketError, ValueError):
    pass


class InvalidConfig(MarketError, ValueError):
    def __init__(self, field: str, reason: str = ""):
        msg = f"invalid config field {field!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.field = field


class NoQuotes(MarketError, ValueError):
    pass


class IoError(MarketError, OSError):
    """An output file could not be written."""
