"""Exception types shared across the library."""


class DomainError(ValueError):
    """An input is outside the mathematical domain of the operation."""


class StepFunctionEdge(ValueError):
    """A derivative is requested exactly at the expiry/zero-vol kink where it
    is undefined."""


class BelowIntrinsicError(ValueError):
    """The quoted price is at or below the option's intrinsic value and
    carries no volatility information."""


class AboveUpperBoundError(ValueError):
    """The quoted price is at or above the model's upper no-arbitrage bound."""
