"""Standard normal distribution primitives.

The CDF is computed from the complementary error function so that the deep
tails keep full relative accuracy (the naive ``0.5*(1+erf(...))`` form loses
all digits below roughly ``x = -6``).  The inverse CDF is Wichura's AS241
(PPND16) rational approximation followed by a single Halley polish against
the erfc-based CDF.
"""

import math

from .errors import DomainError

SQRT_TWO = math.sqrt(2.0)
SQRT_TWO_PI = math.sqrt(2.0 * math.pi)
INV_SQRT_TWO_PI = 1.0 / SQRT_TWO_PI


def norm_cdf(x: float) -> float:
    """Phi(x), accurate to ~1 ulp relative down to x = -37."""
    return 0.5 * math.erfc(-x / SQRT_TWO)


def norm_pdf(x: float) -> float:
    """phi(x) = exp(-x^2/2) / sqrt(2 pi)."""
    return INV_SQRT_TWO_PI * math.exp(-0.5 * x * x)


# AS241 PPND16 coefficients (Wichura, Applied Statistics 37, 1988).
_A = (3.3871328727963666080e0, 1.3314166789178437745e2,
      1.9715909503065514427e3, 1.3731693765509461125e4,
      4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4,
      3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1,
      1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0,
      1.78482653991729133580e0, 2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4,
      1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coeffs, r: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * r + c
    return acc


def _ppnd16(p: float) -> float:
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _poly(_A, r) / _poly(_B, r)
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        val = _poly(_C, r) / _poly(_D, r)
    else:
        r -= 5.0
        val = _poly(_E, r) / _poly(_F, r)
    return -val if q < 0.0 else val


def inv_norm_cdf(p: float) -> float:
    """Inverse of ``norm_cdf`` on (0, 1).

    Raises:
        DomainError: if p is not strictly inside (0, 1).
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"inv_norm_cdf requires p in (0, 1), got {p!r}")
    x = _ppnd16(p)
    # One Halley step on Phi(x) - p guards against the (tiny) approximation
    # error of the rational fit.
    pdf = norm_pdf(x)
    if pdf > 0.0:
        err = norm_cdf(x) - p
        u = err / pdf
        x -= u / (1.0 + 0.5 * x * u)
    return x
