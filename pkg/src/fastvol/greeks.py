"""Analytic Greeks for the three pricing models.

All five sensitivities come out of one fused core that evaluates d1/d2 and
the normal-distribution terms exactly once, so ``all_greeks`` and the
individual accessors are bit-for-bit identical by construction.

Reporting conventions (disable with ``raw=True``):
  * theta is calendar decay per day (divided by ``day_count``, default 365)
  * vega and rho are per 1% move (divided by 100)
"""

import math
from dataclasses import dataclass

from .distributions import norm_cdf, norm_pdf
from .errors import StepFunctionEdge
from .models import Model, PricingInputs
from .pricing import VOL_TIME_CUTOFF

DEFAULT_DAY_COUNT = 365.0


@dataclass(frozen=True)
class GreeksRecord:
    delta: float
    gamma: float
    theta: float
    rho: float
    vega: float

    def as_tuple(self):
        return (self.delta, self.gamma, self.theta, self.rho, self.vega)


def _edge_delta(theta_flag: int, F: float, K: float, carry_disc: float) -> float:
    """Almost-everywhere limit of delta at the zero-vol/expiry kink."""
    if F == K:
        raise StepFunctionEdge("delta is undefined exactly at the money with "
                               "zero total volatility")
    if theta_flag > 0:
        return carry_disc if F > K else 0.0
    return -carry_disc if F < K else 0.0


def _core(theta_flag: int, inputs: PricingInputs, raw: bool,
          day_count: float) -> GreeksRecord:
    inputs.validate()
    t = inputs.t
    sigma = inputs.sigma
    sqrt_t = math.sqrt(t)
    s = sigma * sqrt_t
    r, q = inputs.r, inputs.q
    K = inputs.strike
    disc = math.exp(-r * t)
    forward_model = inputs.model is Model.BLACK76

    if s < VOL_TIME_CUTOFF:
        raise StepFunctionEdge(
            "Greeks other than delta are undefined at t=0 or sigma=0")

    if forward_model:
        F = inputs.underlying
        carry_disc = disc            # forward delta discounts at r
        under = F
    else:
        S = inputs.underlying
        F = S * math.exp((r - q) * t)
        carry_disc = math.exp(-q * t)
        under = S

    d1 = (math.log(F / K) + 0.5 * s * s) / s
    d2 = d1 - s
    cdf_td1 = norm_cdf(theta_flag * d1)
    cdf_td2 = norm_cdf(theta_flag * d2)
    pdf_d1 = norm_pdf(d1)

    delta = theta_flag * carry_disc * cdf_td1
    gamma = carry_disc * pdf_d1 / (under * s)
    vega = carry_disc * under * pdf_d1 * sqrt_t

    if forward_model:
        # F held fixed: theta_cal = r*V - disc*F*phi(d1)*sigma/(2*sqrt(t)),
        # rho = -t*V (pure discounting).
        value = disc * theta_flag * (F * cdf_td1 - K * cdf_td2)
        theta_cal = r * value - disc * F * pdf_d1 * sigma / (2.0 * sqrt_t)
        rho = -t * value
    else:
        theta_cal = (-under * carry_disc * pdf_d1 * sigma / (2.0 * sqrt_t)
                     - theta_flag * (r * K * disc * cdf_td2
                                     - q * under * carry_disc * cdf_td1))
        rho = theta_flag * K * t * disc * cdf_td2

    if not raw:
        theta_cal = theta_cal / day_count
        rho = rho / 100.0
        vega = vega / 100.0
    return GreeksRecord(delta=delta, gamma=gamma, theta=theta_cal, rho=rho,
                        vega=vega)


def all_greeks(theta_flag: int, inputs: PricingInputs, raw: bool = False,
               day_count: float = DEFAULT_DAY_COUNT) -> GreeksRecord:
    """All five Greeks in one pass over d1/d2."""
    return _core(theta_flag, inputs, raw, day_count)


def delta(theta_flag: int, inputs: PricingInputs, raw: bool = False,
          day_count: float = DEFAULT_DAY_COUNT) -> float:
    inputs.validate()
    s = inputs.sigma * math.sqrt(inputs.t)
    if s < VOL_TIME_CUTOFF:
        if inputs.model is Model.BLACK76:
            carry_disc = math.exp(-inputs.r * inputs.t)
            F = inputs.underlying
        else:
            carry_disc = math.exp(-inputs.q * inputs.t)
            F = inputs.forward
        return _edge_delta(theta_flag, F, inputs.strike, carry_disc)
    return _core(theta_flag, inputs, raw, day_count).delta


def gamma(inputs: PricingInputs, raw: bool = False,
          day_count: float = DEFAULT_DAY_COUNT) -> float:
    """Flag-independent; evaluated on the call branch."""
    return _core(1, inputs, raw, day_count).gamma


def theta(theta_flag: int, inputs: PricingInputs, raw: bool = False,
          day_count: float = DEFAULT_DAY_COUNT) -> float:
    return _core(theta_flag, inputs, raw, day_count).theta


def rho(theta_flag: int, inputs: PricingInputs, raw: bool = False,
        day_count: float = DEFAULT_DAY_COUNT) -> float:
    return _core(theta_flag, inputs, raw, day_count).rho


def vega(inputs: PricingInputs, raw: bool = False,
         day_count: float = DEFAULT_DAY_COUNT) -> float:
    """Flag-independent; evaluated on the call branch."""
    return _core(1, inputs, raw, day_count).vega
