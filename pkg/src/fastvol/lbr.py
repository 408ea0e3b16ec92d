"""Rational-guess / Householder(3) implied-volatility inversion in normalized
Black coordinates.

A quote (flag, F, K, t, r, price) is mapped to (x, beta) with
``x = ln(F/K)`` and ``beta = price * exp(r t) / sqrt(F K)``, reduced to an
out-of-the-money call (theta = +1, x <= 0) via put-call parity and the
reflection ``b_put(x, s) = b_call(-x, s)``.  In these coordinates the pricing
map is ``b(x, s)`` with total volatility ``s = sigma * sqrt(t)``, bounded by
``0 < b < b_max = exp(x/2)``.

The inversion classifies beta into one of four regions around the crossover
total vol ``s_c = sqrt(2|x|)``, builds a region-specific initial guess, and
polishes it with a bracketed Householder(3) iteration on a transformed
objective (``1/ln b`` in the far-low wing, ``b`` itself in the middle,
``ln(b_max - b)`` in the far-high wing).

The normalized Black function itself is evaluated through scaled-erfc
(erfcx) products with small-t and deep-tail series expansions, so that it
keeps ~1e-13 relative accuracy down to b ~ 1e-300.
"""

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial.polynomial import polyval
from scipy.linalg import pascal
from scipy.special import erfcx as _erfcx_np
from scipy.special import factorial2

from .distributions import INV_SQRT_TWO_PI, SQRT_TWO, inv_norm_cdf, norm_cdf
from .errors import AboveUpperBoundError, BelowIntrinsicError, DomainError
from .solver import SolverResult, SolverStatus

DBL_EPSILON = 2.220446049250313e-16
# Threshold below which the small-t expansion of b is more accurate than the
# erfcx product form: 2 * eps^(1/16).
SMALL_T_THRESHOLD = 2.0 * DBL_EPSILON ** 0.0625
# h = x/s below this uses the divergent-series asymptotic expansion.
ASYMPTOTIC_H_THRESHOLD = -10.0
ATM_X_CUTOFF = 1e-12
REGION_RATIO = 0.5          # lower anchor at s_c * 0.5, upper at s_c / 0.5
STEP_TOLERANCE = 1e-14


def _erfcx(z: float) -> float:
    return float(_erfcx_np(z))


# ---------------------------------------------------------------------------
# Normalized Black evaluation
# ---------------------------------------------------------------------------

# 17th-order expansion of Y(h+t)-Y(h-t), Y(z) = Phi(z)/phi(z), for h << 0
# (Abramowitz & Stegun 26.2.12), arranged as nested polynomials in
# q = (h/((h+t)(h-t)))^2 and e = (t/h)^2.
_ASYM_FACTS = np.concatenate(
    [[1.0], [float(factorial2(n)) * (-1.0) ** ((n + 1) // 2)
             for n in range(1, 34, 2)]])
_ASYM_PASCAL = 2.0 * pascal(36, kind="lower")[:, 1::2][1::2, :].T


def _asymptotic_black(h: float, t: float) -> float:
    e = (t / h) * (t / h)
    r = (h + t) * (h - t)
    q = (h / r) * (h / r)
    total = float(polyval(q, _ASYM_FACTS * polyval(e, _ASYM_PASCAL)))
    b = INV_SQRT_TWO_PI * math.exp(-0.5 * (h * h + t * t)) * (t / r) * total
    return max(b, 0.0)


def _small_t_black(h: float, t: float) -> float:
    # Twelfth-order expansion in t of Y(h+t)-Y(h-t); requires h <= 0 and
    # t < SMALL_T_THRESHOLD.
    a = 1.0 + h * (0.5 * math.sqrt(2.0 * math.pi)) * _erfcx(-h / SQRT_TWO)
    w = t * t
    h2 = h * h
    c1 = (-1 + 3 * a + a * h2) / 6
    c2 = (-7 + 15 * a + h2 * (-1 + 10 * a + a * h2)) / 120
    c3 = (-57 + 105 * a
          + h2 * (-18 + 105 * a + h2 * (-1 + 21 * a + a * h2))) / 5040
    c4 = (-561 + 945 * a
          + h2 * (-285 + 1260 * a
                  + h2 * (-33 + 378 * a
                          + h2 * (-1 + 36 * a + a * h2)))) / 362880
    c5 = (-6555 + 10395 * a
          + h2 * (-4680 + 17325 * a
                  + h2 * (-840 + 6930 * a
                          + h2 * (-52 + 990 * a
                                  + h2 * (-1 + 55 * a + a * h2))))) / 39916800
    c6 = (-89055 + 135135 * a
          + h2 * (-82845 + 270270 * a
                  + h2 * (-20370 + 135135 * a
                          + h2 * (-1926 + 25740 * a
                                  + h2 * (-75 + 2145 * a
                                          + h2 * (-1 + 78 * a + a * h2)))))
          ) / 6227020800.0
    expansion = 2 * t * (a + w * (c1 + w * (c2 + w * (c3 + w * (
        c4 + w * (c5 + w * c6))))))
    b = INV_SQRT_TWO_PI * math.exp(-0.5 * (h * h + t * t)) * expansion
    return max(b, 0.0)


def _erfcx_black(h: float, t: float) -> float:
    b = 0.5 * math.exp(-0.5 * (h * h + t * t)) * (
        _erfcx(-(h + t) / SQRT_TWO) - _erfcx(-(h - t) / SQRT_TWO))
    return max(b, 0.0)


def normalized_black(x: float, s: float) -> float:
    """b(x, s) for an out-of-the-money call (x <= 0), s > 0."""
    if x > 0.0:
        raise DomainError(f"normalized_black requires x <= 0, got {x!r}")
    if not s > 0.0:
        raise DomainError(f"normalized_black requires s > 0, got {s!r}")
    h = x / s
    t = 0.5 * s
    if (h < ASYMPTOTIC_H_THRESHOLD
            and t < SMALL_T_THRESHOLD + (ASYMPTOTIC_H_THRESHOLD - h)):
        return _asymptotic_black(h, t)
    if t < SMALL_T_THRESHOLD:
        return _small_t_black(h, t)
    if h + t > 0.85:
        b_max = math.exp(0.5 * x)
        b = norm_cdf(h + t) * b_max - norm_cdf(h - t) / b_max
        return max(b, 0.0)
    return _erfcx_black(h, t)


def normalized_black_complement(x: float, s: float) -> float:
    """b_max - b(x, s), evaluated without cancellation."""
    h = x / s
    t = 0.5 * s
    return (math.exp(0.5 * x) * norm_cdf(-h - t)
            + math.exp(-0.5 * x) * norm_cdf(h - t))


def normalized_black_log(x: float, s: float) -> float:
    """ln b(x, s) for the low wing (requires h + t <= 0 so both erfcx
    arguments are nonnegative); representable far below the underflow
    threshold of b itself."""
    h = x / s
    t = 0.5 * s
    diff = _erfcx(-(h + t) / SQRT_TWO) - _erfcx(-(h - t) / SQRT_TWO)
    if diff <= 0.0:
        return -math.inf
    return -0.5 * (h * h + t * t) + math.log(0.5 * diff)


def normalized_vega(x: float, s: float) -> float:
    """b'(x, s) = exp(x/2) * phi(x/s + s/2), in stable symmetric form."""
    h = x / s
    t = 0.5 * s
    return INV_SQRT_TWO_PI * math.exp(-0.5 * (h * h + t * t))


# ---------------------------------------------------------------------------
# Quote normalization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalizedQuote:
    theta: int            # original flag
    x: float              # original log-moneyness ln(F/K)
    beta: float           # original normalized undiscounted price
    x_work: float         # after reduction to an OTM call (<= 0)
    beta_work: float
    b_max: float          # exp(x_work / 2)
    s: Optional[float] = None


def normalize_quote(theta: int, F: float, K: float, t: float, r: float,
                    price: float) -> NormalizedQuote:
    """Map a quote to normalized coordinates and reduce it to an
    out-of-the-money call.

    Raises:
        BelowIntrinsicError / AboveUpperBoundError for quotes outside the
        open no-arbitrage band (tolerance 1e-15 * b_max).
    """
    if not (F > 0.0 and K > 0.0):
        raise DomainError("F and K must be positive")
    if not t > 0.0:
        raise DomainError(f"t must be > 0, got {t!r}")
    if not math.isfinite(price):
        raise DomainError(f"price must be finite, got {price!r}")
    x = math.log(F / K)
    beta = price * math.exp(r * t) / math.sqrt(F * K)
    parity = math.exp(0.5 * x) - math.exp(-0.5 * x)  # beta_call - beta_put
    if theta > 0:
        beta_work = beta - parity if x > 0.0 else beta
    else:
        beta_work = beta + parity if x < 0.0 else beta
    x_work = -abs(x)
    b_max = math.exp(0.5 * x_work)
    # Lower cutoff is absolute (representability floor), not relative to
    # b_max: deep-wing quotes down to ~1e-300 are legitimately invertible.
    if beta_work <= 1e-300:
        raise BelowIntrinsicError(
            f"normalized price {beta_work!r} at or below intrinsic")
    if beta_work >= b_max * (1.0 - 1e-15):
        raise AboveUpperBoundError(
            f"normalized price {beta_work!r} at or above cap {b_max!r}")
    return NormalizedQuote(theta=theta, x=x, beta=beta, x_work=x_work,
                           beta_work=beta_work, b_max=b_max)


# ---------------------------------------------------------------------------
# Region selection and initial guess
# ---------------------------------------------------------------------------

class RegionId(enum.Enum):
    FAR_LOW = "far_low"
    NEAR_LOW = "near_low"
    NEAR_HIGH = "near_high"
    FAR_HIGH = "far_high"


@dataclass(frozen=True)
class _Anchors:
    s_lo: float
    s_c: float
    s_hi: float
    b_lo: float
    b_c: float
    b_hi: float


def _anchors(x: float) -> _Anchors:
    s_c = math.sqrt(2.0 * abs(x))
    s_lo = s_c * REGION_RATIO
    s_hi = s_c / REGION_RATIO
    return _Anchors(s_lo, s_c, s_hi,
                    normalized_black(x, s_lo),
                    normalized_black(x, s_c),
                    normalized_black(x, s_hi))


def _region(beta: float, anchors: _Anchors) -> RegionId:
    if beta < anchors.b_lo:
        return RegionId.FAR_LOW
    if beta < anchors.b_c:
        return RegionId.NEAR_LOW
    if beta < anchors.b_hi:
        return RegionId.NEAR_HIGH
    return RegionId.FAR_HIGH


def select_region(x: float, beta: float) -> RegionId:
    """Classify a working-coordinate quote (x < 0, 0 < beta < b_max)."""
    if x >= 0.0:
        raise DomainError("select_region requires x < 0")
    return _region(beta, _anchors(x))


def atm_inverse(beta: float) -> float:
    """Exact inversion of b(0, s) = 2*Phi(s/2) - 1."""
    if not 0.0 < beta < 1.0:
        raise DomainError(f"atm_inverse requires beta in (0, 1), got {beta!r}")
    return -2.0 * inv_norm_cdf(0.5 * (1.0 - beta))


def _hermite_inverse(beta: float, b0: float, b1: float, s0: float, s1: float,
                     x: float) -> float:
    # Cubic Hermite of s as a function of ln b between two anchors, with
    # slopes ds/d(ln b) = b/b' known at both ends.  Working in ln b keeps
    # the interpolant well conditioned when beta spans many decades.
    m0 = b0 / normalized_vega(x, s0)
    m1 = b1 / normalized_vega(x, s1)
    du = math.log(b1) - math.log(b0)
    u = (math.log(beta) - math.log(b0)) / du
    u2 = u * u
    u3 = u2 * u
    s = ((2 * u3 - 3 * u2 + 1) * s0 + (u3 - 2 * u2 + u) * du * m0
         + (-2 * u3 + 3 * u2) * s1 + (u3 - u2) * du * m1)
    if not (min(s0, s1) <= s <= max(s0, s1)):
        s = s0 + u * (s1 - s0)
    return s


def _far_low_guess(x: float, beta: float, anchors: _Anchors) -> float:
    # Leading small-beta asymptotic s ~ |x| / sqrt(-2 ln beta), refined by a
    # few safeguarded Newton steps in v = ln s on ln b(x, e^v) = ln beta.
    ln_beta = math.log(beta)
    s_cap = anchors.s_lo
    s = abs(x) / math.sqrt(-2.0 * ln_beta)
    s = min(max(s, 1e-6 * s_cap), 0.999 * s_cap)
    v = math.log(s)
    v_hi = math.log(s_cap)
    for _ in range(5):
        g = normalized_black_log(x, s) - ln_beta
        if g > 0.0:
            v_hi = min(v_hi, v)
        dg_dv = s * math.exp(
            math.log(INV_SQRT_TWO_PI)
            - 0.5 * ((x / s) ** 2 + 0.25 * s * s)
            - normalized_black_log(x, s))
        if not (math.isfinite(dg_dv) and dg_dv > 0.0):
            break
        v_new = v - g / dg_dv
        if not math.isfinite(v_new):
            break
        if v_new >= v_hi:
            v_new = 0.5 * (v + v_hi)
        v = v_new
        s = math.exp(v)
    return s


def _far_high_guess(x: float, beta: float, b_max: float) -> float:
    # Invert the large-s tail b_max - b ~ 2 * b_max * Phi(|x|/s - s/2);
    # exact at x = 0.
    p = (b_max - beta) / (2.0 * b_max)
    p = min(max(p, 5e-324), 0.5 * (1.0 - DBL_EPSILON))
    z = inv_norm_cdf(p)
    return -z + math.sqrt(z * z + 2.0 * abs(x))


def initial_guess(x: float, beta: float, region: RegionId) -> float:
    """Strictly positive starting total vol for the Householder refinement."""
    if abs(x) < ATM_X_CUTOFF:
        return atm_inverse(beta)
    a = _anchors(x)
    if region is RegionId.FAR_LOW:
        return _far_low_guess(x, beta, a)
    if region is RegionId.NEAR_LOW:
        return _hermite_inverse(beta, a.b_lo, a.b_c, a.s_lo, a.s_c, x)
    if region is RegionId.NEAR_HIGH:
        return _hermite_inverse(beta, a.b_c, a.b_hi, a.s_c, a.s_hi, x)
    return _far_high_guess(x, beta, math.exp(0.5 * x))


# ---------------------------------------------------------------------------
# Transformed objective and Householder(3) refinement
# ---------------------------------------------------------------------------

def _vega_ratios(x: float, s: float) -> Tuple[float, float]:
    # b''/b' and b'''/b' in closed form.
    r2 = x * x / (s * s * s) - 0.25 * s
    r3 = r2 * r2 - 3.0 * x * x / (s ** 4) - 0.25
    return r2, r3


def objective_branch(x: float, s: float, beta: float,
                     region: RegionId) -> Tuple[float, float, float, float]:
    """Objective g and its first three s-derivatives for the region's branch.

    Low wing:    g = 1/ln b - 1/ln beta
    Middle:      g = b - beta
    High wing:   g = ln((b_max - beta) / (b_max - b))

    All three branches are increasing-to-the-root transforms of b - beta = 0
    (the low branch is monotone decreasing in s; its sign still locates the
    root unambiguously).
    """
    if not s > 0.0:
        raise DomainError(f"objective_branch requires s > 0, got {s!r}")
    bp = normalized_vega(x, s)
    r2, r3 = _vega_ratios(x, s)
    if region is RegionId.FAR_LOW:
        ln_b = normalized_black_log(x, s)
        ln_beta = math.log(beta)
        h = x / s
        ln_bp = math.log(INV_SQRT_TWO_PI) - 0.5 * (h * h + 0.25 * s * s)
        up = math.exp(ln_bp - ln_b)                               # b'/b
        upp = up * r2 - up * up                                   # (b'/b)'
        uppp = up * r3 - 3.0 * up * up * r2 + 2.0 * up ** 3
        inv = 1.0 / ln_b
        inv2 = inv * inv
        g = inv - 1.0 / ln_beta
        g1 = -up * inv2
        g2 = -upp * inv2 + 2.0 * up * up * inv2 * inv
        g3 = (-uppp * inv2 + 6.0 * up * upp * inv2 * inv
              - 6.0 * up ** 3 * inv2 * inv2)
        return g, g1, g2, g3
    if region is RegionId.FAR_HIGH:
        b_max = math.exp(0.5 * x)
        comp = normalized_black_complement(x, s)                  # b_max - b
        comp_beta = b_max - beta
        w = bp / comp
        g = math.log(comp_beta) - math.log(comp)
        g1 = w
        g2 = w * r2 + w * w
        g3 = w * r3 + 3.0 * w * w * r2 + 2.0 * w ** 3
        return g, g1, g2, g3
    b = normalized_black(x, s)
    return b - beta, bp, bp * r2, bp * r3


def householder3_step(g: float, g1: float, g2: float, g3: float) -> float:
    """Third-order Householder update step; returns NaN when g1 is unusable
    so the caller can fall back to a bracket bisection."""
    if g == 0.0:
        return 0.0
    if g1 == 0.0 or not math.isfinite(g1):
        return float("nan")
    nu = -g / g1
    eta = g2 / g1
    gam = g3 / (6.0 * g1)
    return nu * (1.0 + 0.5 * nu * eta) / (1.0 + nu * (eta + nu * gam))


def _low_branch_sign_up(region: RegionId) -> bool:
    # True when g is increasing in s (middle and high branches).
    return region is not RegionId.FAR_LOW


def implied_vol_lbr(target_price: float, theta: int, F: float, K: float,
                    t: float, r: float, *, max_iter: int = 8) -> SolverResult:
    """Implied volatility by normalization, four-region rational guess, and
    bracketed Householder(3) refinement."""
    nan = float("nan")
    try:
        quote = normalize_quote(theta, F, K, t, r, target_price)
    except BelowIntrinsicError:
        return SolverResult(nan, 0, SolverStatus.BELOW_INTRINSIC, nan)
    except AboveUpperBoundError:
        return SolverResult(nan, 0, SolverStatus.ABOVE_UPPER_BOUND, nan)

    x = quote.x_work
    beta = quote.beta_work
    sqrt_t = math.sqrt(t)
    scale = math.sqrt(F * K) * math.exp(-r * t)   # beta -> currency

    if abs(x) < ATM_X_CUTOFF:
        s = atm_inverse(beta)
        resid = (normalized_black(min(x, 0.0), s) - beta) * scale
        return SolverResult(s / sqrt_t, 0, SolverStatus.CONVERGED, resid)

    anchors = _anchors(x)
    region = _region(beta, anchors)
    if region is RegionId.FAR_LOW:
        lo, hi = 0.0, anchors.s_lo
    elif region is RegionId.NEAR_LOW:
        lo, hi = anchors.s_lo, anchors.s_c
    elif region is RegionId.NEAR_HIGH:
        lo, hi = anchors.s_c, anchors.s_hi
    else:
        lo, hi = anchors.s_hi, 2.0 * anchors.s_hi
        comp_beta = quote.b_max - beta
        while normalized_black_complement(x, hi) > comp_beta and hi < 1e6:
            hi *= 2.0
    # Widen the anchor bracket slightly so a root sitting exactly on a
    # region boundary is interior and steps toward it are not clipped.
    lo *= 1.0 - 1e-6
    hi *= 1.0 + 1e-6

    s = initial_guess(x, beta, region)
    if not (lo < s < hi):
        s = 0.5 * (lo + hi)

    increasing = _low_branch_sign_up(region)
    iterations = 0
    converged = False
    for _ in range(max_iter):
        g, g1, g2, g3 = objective_branch(x, s, beta, region)
        if g == 0.0:
            converged = True
            break
        below = (g < 0.0) if increasing else (g > 0.0)
        if below:
            lo = max(lo, s)
        else:
            hi = min(hi, s)
        ds = householder3_step(g, g1, g2, g3)
        if math.isfinite(ds) and abs(ds) <= STEP_TOLERANCE * max(1.0, s):
            # Step below tolerance: accept before the bracket clip, which
            # could otherwise bounce a fully-converged iterate off an edge.
            s += ds
            iterations += 1
            converged = True
            break
        cand = s + ds
        if not math.isfinite(cand) or not (lo < cand < hi):
            cand = 0.5 * (lo + hi)
            ds = cand - s
        s = cand
        iterations += 1
        if abs(ds) <= STEP_TOLERANCE * max(1.0, s):
            converged = True
            break
    resid = (normalized_black(x, s) - beta) * scale
    status = SolverStatus.CONVERGED if converged else SolverStatus.MAX_ITERATIONS
    return SolverResult(s / sqrt_t, iterations, status, resid)
