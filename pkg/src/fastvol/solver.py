"""Default implied-volatility solver: safeguarded Halley iteration on the
pricing residual, with a guaranteed bisection fallback on a sign-changing
bracket."""

import enum
import math
from dataclasses import dataclass

from .distributions import norm_pdf
from .models import Model
from .pricing import VOL_TIME_CUTOFF, black_kernel


class SolverStatus(enum.Enum):
    CONVERGED = "converged"
    FELL_BACK_TO_BISECTION = "fell_back_to_bisection"
    BELOW_INTRINSIC = "below_intrinsic"
    ABOVE_UPPER_BOUND = "above_upper_bound"
    MAX_ITERATIONS = "max_iterations"

    @property
    def ok(self) -> bool:
        return self in (SolverStatus.CONVERGED,
                        SolverStatus.FELL_BACK_TO_BISECTION)


@dataclass(frozen=True)
class SolverResult:
    sigma: float
    iterations: int
    status: SolverStatus
    residual: float


SIGMA_LO = 1e-9
SIGMA_HI = 10.0
SIGMA_HI_CAP = 100.0


def _raw_vega(F: float, K: float, t: float, discount: float, sigma: float) -> float:
    # S*exp(-q t) == F*exp(-r t), so one formula covers all three models.
    s = sigma * math.sqrt(t)
    if s < VOL_TIME_CUTOFF:
        return 0.0
    d1 = (math.log(F / K) + 0.5 * s * s) / s
    return discount * F * norm_pdf(d1) * math.sqrt(t)


def implied_vol_halley(target_price: float, theta_flag: int, model: Model,
                       underlying: float, K: float, t: float, r: float,
                       q: float = 0.0, *, tol_price: float = None,
                       tol_sigma: float = 1e-12, max_halley: int = 16,
                       max_bisect: int = 128) -> SolverResult:
    """Invert the pricing map in sigma for one contract.

    The iterate is accepted only while it stays inside the current
    sign-changing bracket and reduces ``|price - target|``; any rejected step
    is replaced by a bisection of the bracket.
    """
    if model is Model.BLACK76:
        F = underlying
    else:
        F = underlying * math.exp((r - q) * t)
    discount = math.exp(-r * t)
    sqrt_t = math.sqrt(t)

    disc_intrinsic = discount * max(theta_flag * (F - K), 0.0)
    disc_cap = discount * (F if theta_flag > 0 else K)
    tie_tol = tol_price if tol_price is not None else \
        1e-12 * max(1.0, disc_cap)

    nan = float("nan")
    if not math.isfinite(target_price):
        return SolverResult(nan, 0, SolverStatus.BELOW_INTRINSIC, nan)
    # Tie rule: a quote within tolerance of intrinsic carries no vol info.
    if target_price <= disc_intrinsic + tie_tol:
        return SolverResult(nan, 0, SolverStatus.BELOW_INTRINSIC, nan)
    if target_price > disc_cap + tie_tol:
        return SolverResult(nan, 0, SolverStatus.ABOVE_UPPER_BOUND, nan)
    # Convergence must be judged against the premium scale, not the cap
    # scale, or tiny deep-wing premiums stop with large sigma error.
    if tol_price is None:
        tol_price = min(tie_tol, 1e-10 * (target_price - disc_intrinsic))
    if t <= 0.0:
        # Price is pinned at intrinsic; anything else is unattainable.
        return SolverResult(nan, 0, SolverStatus.ABOVE_UPPER_BOUND, nan)

    def f(sigma: float) -> float:
        return black_kernel(theta_flag, F, K, discount, sigma * sqrt_t) - target_price

    lo, hi = SIGMA_LO, SIGMA_HI
    f_lo = f(lo)
    if f_lo >= 0.0:
        if abs(f_lo) <= tol_price:
            return SolverResult(lo, 0, SolverStatus.CONVERGED, f_lo)
        return SolverResult(nan, 0, SolverStatus.BELOW_INTRINSIC, nan)
    f_hi = f(hi)
    while f_hi < 0.0 and hi < SIGMA_HI_CAP:
        hi = min(2.0 * hi, SIGMA_HI_CAP)
        f_hi = f(hi)
    if f_hi < 0.0:
        return SolverResult(nan, 0, SolverStatus.MAX_ITERATIONS, f_hi)

    # Brenner-Subrahmanyam-type starting point, clamped into the bracket.
    sigma = math.sqrt(2.0 * math.pi / t) * target_price / underlying
    sigma = min(max(sigma, 0.05), 2.0)
    sigma = min(max(sigma, lo), hi)
    fval = f(sigma)
    if fval > 0.0:
        hi = min(hi, sigma)
    elif fval < 0.0:
        lo = max(lo, sigma)

    iterations = 0
    for _ in range(max_halley):
        if abs(fval) <= tol_price:
            return SolverResult(sigma, iterations, SolverStatus.CONVERGED, fval)
        vega = _raw_vega(F, K, t, discount, sigma)
        cand = nan
        if vega > 0.0:
            s = sigma * sqrt_t
            d1 = (math.log(F / K) + 0.5 * s * s) / s
            d2 = d1 - s
            vomma = vega * d1 * d2 / sigma
            denom = 2.0 * vega * vega - fval * vomma
            if denom != 0.0:
                cand = sigma - 2.0 * fval * vega / denom
        accepted = False
        if math.isfinite(cand) and lo < cand < hi:
            f_cand = f(cand)
            if abs(f_cand) < abs(fval):
                accepted = True
        if not accepted:
            cand = 0.5 * (lo + hi)
            f_cand = f(cand)
        if f_cand > 0.0:
            hi = cand
        elif f_cand < 0.0:
            lo = cand
        step = cand - sigma
        sigma, fval = cand, f_cand
        iterations += 1
        if abs(step) <= tol_sigma * max(1.0, sigma):
            return SolverResult(sigma, iterations, SolverStatus.CONVERGED, fval)

    # Halley budget exhausted: pure bisection on the (guaranteed) bracket.
    for _ in range(max_bisect):
        if abs(fval) <= tol_price or (hi - lo) <= tol_sigma * max(1.0, sigma):
            return SolverResult(sigma, iterations,
                                SolverStatus.FELL_BACK_TO_BISECTION, fval)
        sigma = 0.5 * (lo + hi)
        fval = f(sigma)
        if fval > 0.0:
            hi = sigma
        else:
            lo = sigma
        iterations += 1
    if abs(fval) <= tol_price or (hi - lo) <= tol_sigma * max(1.0, sigma):
        return SolverResult(sigma, iterations,
                            SolverStatus.FELL_BACK_TO_BISECTION, fval)
    return SolverResult(nan, iterations, SolverStatus.MAX_ITERATIONS, fval)
