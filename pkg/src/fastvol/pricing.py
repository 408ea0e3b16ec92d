"""Forward-form Black pricing shared by all three models.

Every model is the same kernel on (F, discount):

    V = discount * theta * (F * Phi(theta*d1) - K * Phi(theta*d2))

with F = underlying for Black-76 and F = S * exp((r - q) * t) for the spot
models.  Zero volatility or zero time short-circuits to the discounted
intrinsic value.
"""

import math

from .distributions import norm_cdf
from .errors import DomainError
from .models import Model, PricingInputs

# sigma*sqrt(t) below this is treated as zero volatility; avoids d1 overflow
# while staying below any economically meaningful total vol.
VOL_TIME_CUTOFF = 1e-12


def black_kernel(theta: int, F: float, K: float, discount: float, s: float) -> float:
    """Undiscounted-forward Black price times ``discount``; ``s = sigma*sqrt(t)``."""
    intrinsic = max(theta * (F - K), 0.0)
    cap = F if theta > 0 else K
    if s < VOL_TIME_CUTOFF:
        return discount * intrinsic
    d1 = (math.log(F / K) + 0.5 * s * s) / s
    d2 = d1 - s
    raw = theta * (F * norm_cdf(theta * d1) - K * norm_cdf(theta * d2))
    # Clamp away sub-ulp excursions outside the no-arbitrage band.
    return discount * min(max(raw, intrinsic), cap)


def _check(theta: int, F: float, K: float, t: float, sigma: float) -> None:
    if theta not in (1, -1):
        raise DomainError(f"theta flag must be +1 or -1, got {theta!r}")
    if not (math.isfinite(F) and F > 0.0):
        raise DomainError(f"underlying/forward must be positive, got {F!r}")
    if not (math.isfinite(K) and K > 0.0):
        raise DomainError(f"strike must be positive, got {K!r}")
    if not (math.isfinite(t) and t >= 0.0):
        raise DomainError(f"t must be >= 0, got {t!r}")
    if not (math.isfinite(sigma) and sigma >= 0.0):
        raise DomainError(f"sigma must be >= 0, got {sigma!r}")


def price_black76(theta: int, F: float, K: float, t: float, r: float,
                  sigma: float) -> float:
    """Black-76 price on a forward."""
    _check(theta, F, K, t, sigma)
    return black_kernel(theta, F, K, math.exp(-r * t), sigma * math.sqrt(t))


def price_bsm(theta: int, S: float, K: float, t: float, r: float, q: float,
              sigma: float) -> float:
    """Black-Scholes-Merton price on spot with continuous dividend yield q."""
    _check(theta, S, K, t, sigma)
    F = S * math.exp((r - q) * t)
    return black_kernel(theta, F, K, math.exp(-r * t), sigma * math.sqrt(t))


def price_black_scholes(theta: int, S: float, K: float, t: float, r: float,
                        sigma: float) -> float:
    """Black-Scholes price on spot (BSM with q = 0)."""
    return price_bsm(theta, S, K, t, r, 0.0, sigma)


def price(theta: int, inputs: PricingInputs) -> float:
    """Price a contract described by ``PricingInputs``."""
    inputs.validate()
    if inputs.model is Model.BLACK76:
        return price_black76(theta, inputs.underlying, inputs.strike,
                             inputs.t, inputs.r, inputs.sigma)
    return price_bsm(theta, inputs.underlying, inputs.strike, inputs.t,
                     inputs.r, inputs.q, inputs.sigma)
