"""Shared test helpers: an independent bisection IV oracle and grid builders.

The bisection oracle deliberately avoids the library's own solver machinery
so solver tests have a second, dumber route to the same root.
"""

import numpy as np
import pytest

from fastvol.pricing import price


def bisect_iv(target, theta_flag, inputs_factory, lo=1e-9, hi=10.0,
              steps=128):
    """128-step bisection on sigma.  ``inputs_factory(sigma)`` builds the
    PricingInputs for a candidate vol."""
    f_lo = price(theta_flag, inputs_factory(lo)) - target
    f_hi = price(theta_flag, inputs_factory(hi)) - target
    while f_hi < 0.0 and hi < 100.0:
        hi *= 2.0
        f_hi = price(theta_flag, inputs_factory(hi)) - target
    if f_lo > 0.0 or f_hi < 0.0:
        return float("nan")
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if price(theta_flag, inputs_factory(mid)) - target <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def halley_grid():
    """The acceptance Halley grid: x in [-3,3], sigma in [0.05,2],
    t in {0.1,1,5}, r in {-0.01,0,0.05}, both flags, three models."""
    xs = np.linspace(-3.0, 3.0, 21)
    sigmas = np.array([0.05, 0.2, 0.5, 1.0, 2.0])
    ts = np.array([0.1, 1.0, 5.0])
    rs = np.array([-0.01, 0.0, 0.05])
    rows = []
    for x in xs:
        for sig in sigmas:
            for t in ts:
                for r in rs:
                    for th in (1, -1):
                        rows.append((float(x), float(sig), float(t),
                                     float(r), th))
    return rows


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
