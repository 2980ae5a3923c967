import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xbxreg.errors import InvalidOrderError
from xbxreg.quad import DEFAULT_ORDER, MAX_ORDER, QuadratureRule, gauss_laguerre


def test_order_two_closed_form():
    # roots of L_2(x) = (x^2 - 4x + 2)/2 are 2 +- sqrt(2)
    rule = gauss_laguerre(2)
    assert rule.nodes == pytest.approx([2 - math.sqrt(2), 2 + math.sqrt(2)], abs=1e-14)
    assert rule.weights == pytest.approx(
        [(2 + math.sqrt(2)) / 4, (2 - math.sqrt(2)) / 4], abs=1e-14)


def test_weights_sum_to_one():
    # beyond order ~200 the deepest-tail weights drop below the smallest
    # positive double (scipy's reference rule has the same zeros), so the
    # strict-positivity check stops at 128
    for order in (1, 2, 5, 20, 64, 128):
        rule = gauss_laguerre(order)
        assert rule.weights.sum() == pytest.approx(1.0, abs=1e-13)
        assert np.all(rule.weights > 0)
        assert np.all(np.diff(rule.nodes) > 0)
        assert np.all(rule.nodes > 0)
    top = gauss_laguerre(MAX_ORDER)
    assert top.weights.sum() == pytest.approx(1.0, abs=1e-13)
    assert np.all(top.weights >= 0)


@pytest.mark.parametrize("k", [0, 1, 2, 5, 10, 25, 39])
def test_moment_exactness(k):
    # integral of x^k e^{-x} = k! ; exact for polynomial degree <= 2T-1
    rule = gauss_laguerre(DEFAULT_ORDER)
    got = rule.integrate(lambda x: x ** float(k))
    assert got == pytest.approx(math.factorial(k), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=6))
def test_moment_exactness_property(order, k):
    if k > 2 * order - 1:
        return
    rule = gauss_laguerre(order)
    assert rule.integrate(lambda x: x ** float(k)) == pytest.approx(
        math.factorial(k), rel=1e-10)


def test_exponential_integral():
    # integral of e^{-x} e^{-x} dx = 1/2 (non-polynomial convergence check)
    rule = gauss_laguerre(64)
    assert rule.integrate(np.exp) != pytest.approx(0.5)  # e^{+x} diverges
    assert rule.integrate(lambda x: np.exp(-x)) == pytest.approx(0.5, rel=1e-10)


def test_invalid_orders():
    for bad in (0, -1, MAX_ORDER + 1, 2.5, "3"):
        with pytest.raises(InvalidOrderError):
            gauss_laguerre(bad)


def test_rule_is_immutable_and_cached():
    rule = gauss_laguerre(20)
    assert gauss_laguerre(20) is rule
    with pytest.raises(ValueError):
        rule.nodes[0] = 0.0


def test_matches_scipy_reference():
    from scipy.special import roots_laguerre

    for order in (5, 20, 50):
        rule = gauss_laguerre(order)
        x, w = roots_laguerre(order)
        assert rule.nodes == pytest.approx(x, rel=1e-12)
        # weights are normalized by the total mass of e^{-x} (= 1)
        assert rule.weights == pytest.approx(w / w.sum(), rel=1e-11)
