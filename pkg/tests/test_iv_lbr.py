import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastvol.errors import (AboveUpperBoundError, BelowIntrinsicError,
                            DomainError)
from fastvol.lbr import (RegionId, atm_inverse, householder3_step,
                         implied_vol_lbr, initial_guess, normalize_quote,
                         normalized_black, normalized_black_complement,
                         normalized_vega, objective_branch, select_region)

# mpmath 30-digit oracle evaluations of
# b(x,s) = e^{x/2} Phi(x/s + s/2) - e^{-x/2} Phi(x/s - s/2), frozen.
# The points deliberately land in each evaluation branch: small-s
# expansion, erfcx product, direct Phi, and the deep asymptotic wing.
NB_TABLE = [
    (-0.5, 0.3, 0.005898232610534821276685438),
    (-0.02, 0.1, 0.03067368766113376480384373),
    (-0.5, 1.0, 0.1856830129966638583987393),
    (-0.3, 0.6, 0.1159936675081212139059181),
    (-1.5, 0.9, 0.01654753163120456832122673),
    (-1.0, 3.0, 0.4777039972474732004020372),
    (-2.0, 0.15, 8.21811416011106994160181e-43),
    (-4.0, 0.35, 4.473338372803624097401906e-32),
    (-8.0, 0.3, 6.361838192424581143196604e-159),
]
ATM_B = 0.07965567455405796293080924           # b(0, 0.2)
TWO_PHI_HALF = 0.3829249225480262072754092     # 2*Phi(0.5) - 1, s=1 ATM quote
HH3_EXAMPLE = -0.08578431372549019607843137    # f=x^2-2 at x=1.5, exact -35/408


@pytest.mark.parametrize("x,s,expected", NB_TABLE)
def test_normalized_black_frozen(x, s, expected):
    assert normalized_black(x, s) == pytest.approx(expected, rel=1e-13)


def test_normalized_black_atm():
    assert normalized_black(0.0, 0.2) == pytest.approx(ATM_B, abs=1e-16)


def test_complement_identity():
    for x, s, expected in [(-0.5, 1.0, 0.593117770074741009846431),
                           (-2.0, 4.0, 0.04145661628488506321635467)]:
        assert normalized_black_complement(x, s) == pytest.approx(
            expected, rel=1e-13)
        b_max = math.exp(0.5 * x)
        assert normalized_black(x, s) + normalized_black_complement(x, s) \
            == pytest.approx(b_max, rel=1e-13)


def test_normalized_black_limits_and_monotonicity():
    x = -0.7
    prev = 0.0
    for s in np.logspace(-3, 1.2, 40):
        b = normalized_black(x, float(s))
        assert b >= prev
        prev = b
    assert normalized_black(x, 1e-3) < 1e-100
    assert normalized_black(x, 50.0) == pytest.approx(math.exp(0.5 * x),
                                                      rel=1e-12)


def test_normalized_vega_is_db_ds():
    for x in (-0.01, -0.5, -2.0):
        for s in (0.3, 1.0, 2.5):
            h = 1e-6
            fd = (normalized_black(x, s + h) - normalized_black(x, s - h)) \
                / (2 * h)
            assert normalized_vega(x, s) == pytest.approx(fd, rel=1e-8)


def test_atm_inverse_exact():
    assert atm_inverse(TWO_PHI_HALF) == pytest.approx(1.0, abs=1e-14)
    assert atm_inverse(ATM_B) == pytest.approx(0.2, abs=1e-15)


def test_normalize_quote_and_parity():
    F, K, t, r = 100.0, 120.0, 1.0, 0.03
    x = math.log(F / K)
    sig = 0.25
    from fastvol.pricing import price_black76
    call = price_black76(1, F, K, t, r, sig)
    put = price_black76(-1, F, K, t, r, sig)
    qc = normalize_quote(1, F, K, t, r, call)
    qp = normalize_quote(-1, F, K, t, r, put)
    # both reduce to the same OTM-call working quote
    assert qc.x_work == pytest.approx(qp.x_work, abs=1e-15)
    assert qc.x_work <= 0.0
    assert qc.beta_work == pytest.approx(qp.beta_work, rel=1e-12)
    assert qc.beta_work == pytest.approx(
        normalized_black(x, sig * math.sqrt(t)), rel=1e-12)


def test_normalize_quote_rejections():
    # put below intrinsic
    with pytest.raises(BelowIntrinsicError):
        normalize_quote(-1, 100.0, 120.0, 1.0, 0.0, 19.0)
    # call above the forward bound
    with pytest.raises(AboveUpperBoundError):
        normalize_quote(1, 100.0, 120.0, 1.0, 0.0, 101.0)
    with pytest.raises(DomainError):
        normalize_quote(1, -100.0, 120.0, 1.0, 0.0, 1.0)


def test_select_region_ordering():
    x = -2.0
    s_c = math.sqrt(2.0 * abs(x))
    b_lo = normalized_black(x, 0.5 * s_c)
    b_c = normalized_black(x, s_c)
    b_hi = normalized_black(x, 2.0 * s_c)
    assert select_region(x, b_lo * 0.5) is RegionId.FAR_LOW
    assert select_region(x, 0.5 * (b_lo + b_c)) is RegionId.NEAR_LOW
    assert select_region(x, 0.5 * (b_c + b_hi)) is RegionId.NEAR_HIGH
    assert select_region(x, 0.5 * (b_hi + math.exp(0.5 * x))) is \
        RegionId.FAR_HIGH
    # boundary between the near regions is half-open toward NearHigh
    assert select_region(x, b_c) is RegionId.NEAR_HIGH


def test_far_low_guess_contract():
    # guess relative error must stay within 10% throughout the region;
    # checked at deep representable quotes including x=-5 cases
    for x, s in [(-5.0, 0.2), (-5.0, 0.14), (-2.0, 0.2), (-8.0, 0.35),
                 (-0.5, 0.05), (-0.01, 0.002)]:
        beta = normalized_black(x, s)
        assert select_region(x, beta) is RegionId.FAR_LOW
        g = initial_guess(x, beta, RegionId.FAR_LOW)
        assert abs(g - s) / s <= 0.10


def test_guess_positive_and_bracketed():
    for x in (-0.01, -0.5, -3.0, -9.0):
        for s in np.logspace(-2.5, 0.6, 12):
            beta = normalized_black(x, float(s))
            if beta <= 1e-300 or beta >= math.exp(0.5 * x) * (1 - 1e-15):
                continue
            region = select_region(x, beta)
            g = initial_guess(x, beta, region)
            assert g > 0.0 and math.isfinite(g)


def test_householder3_step_frozen_example():
    # f(x) = x^2 - 2 at x = 1.5: (f, f', f'', f''') = (0.25, 3, 2, 0)
    assert householder3_step(0.25, 3.0, 2.0, 0.0) == pytest.approx(
        HH3_EXAMPLE, abs=1e-16)
    # cross-check against the raw rational form
    g, g1, g2, g3 = 0.25, 3.0, 2.0, 0.0
    classical = -(6 * g * g1 ** 2 - 3 * g ** 2 * g2) / \
        (6 * g1 ** 3 - 6 * g * g1 * g2 + g ** 2 * g3)
    assert householder3_step(g, g1, g2, g3) == pytest.approx(classical,
                                                             abs=1e-16)


def test_householder3_step_degenerate():
    assert householder3_step(0.0, 1.0, 5.0, 5.0) == 0.0
    assert math.isnan(householder3_step(0.1, 0.0, 1.0, 1.0))


def test_objective_branch_derivatives():
    # g1..g3 must be the derivatives of g in s, in every region
    for x, s in [(-2.0, 0.4), (-2.0, 1.5), (-2.0, 2.5), (-2.0, 5.0)]:
        beta = normalized_black(x, s)
        region = select_region(x, beta)
        target = normalized_black(x, s * 1.05)  # solve for a nearby root
        g, g1, g2, g3 = objective_branch(x, s, target, region)
        h = 1e-5
        gm = objective_branch(x, s - h, target, region)[0]
        gp = objective_branch(x, s + h, target, region)[0]
        assert g1 == pytest.approx((gp - gm) / (2 * h), rel=1e-6)
        assert g2 == pytest.approx((gp - 2 * g + gm) / (h * h), rel=1e-4)


def test_round_trip_grid_acceptance_shape():
    xs = np.concatenate([[0.0], -np.logspace(-3, 1.0, 20)])
    ss = np.logspace(-3, math.log10(5.0), 30)
    iters = []
    for x in xs:
        for s in ss:
            beta = normalized_black(float(x), float(s))
            if beta <= 1e-300 or beta >= math.exp(0.5 * x) * (1 - 1e-15):
                continue
            for th in (1, -1):
                # the put side uses the reflected strike so the working
                # quote is the same OTM call: b_put(-x, s) = b_call(x, s)
                F = 100.0
                K = F * math.exp(-float(x) * th)
                price = beta * math.sqrt(F * K)
                res = implied_vol_lbr(price, th, F, K, 1.0, 0.0)
                assert res.status.ok, (x, s, th, res)
                assert abs(res.sigma - float(s)) <= 1e-10 * max(1.0, float(s))
                iters.append(res.iterations)
    assert len(iters) >= 600
    frac4 = sum(i <= 4 for i in iters) / len(iters)
    assert frac4 >= 0.99
    assert max(iters) <= 8


def test_atm_shortcut_zero_iterations():
    from fastvol.pricing import price_black76
    target = price_black76(1, 100, 100, 1.0, 0.0, 0.2)
    res = implied_vol_lbr(target, 1, 100.0, 100.0, 1.0, 0.0)
    assert res.iterations == 0
    assert res.sigma == pytest.approx(0.2, abs=1e-14)


def test_lbr_statuses():
    from fastvol.solver import SolverStatus
    res = implied_vol_lbr(9.0, 1, 100.0, 90.0, 1.0, 0.0)
    assert res.status is SolverStatus.BELOW_INTRINSIC
    res = implied_vol_lbr(101.0, 1, 100.0, 90.0, 1.0, 0.0)
    assert res.status is SolverStatus.ABOVE_UPPER_BOUND


@settings(max_examples=150, deadline=None)
@given(st.floats(min_value=-9.0, max_value=-1e-3),
       st.floats(min_value=1e-2, max_value=5.0))
def test_round_trip_property(x, s):
    beta = normalized_black(x, s)
    if beta <= 1e-300 or beta >= math.exp(0.5 * x) * (1 - 1e-15):
        return
    res = implied_vol_lbr(beta * math.exp(-0.5 * x) * 100.0, 1,
                          100.0, 100.0 * math.exp(-x), 1.0, 0.0)
    assert res.status.ok
    assert abs(res.sigma - s) <= 1e-10 * max(1.0, s)
