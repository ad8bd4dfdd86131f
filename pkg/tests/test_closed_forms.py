import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frackit.closed_forms import PowerFunc, ml_eigenpair, power_rule, taylor_remainder
from frackit.errors import DomainError
from frackit.expr import FuncSpec
from frackit.mesh import Domain
from frackit.operators import OrderParams, caputo_deriv
from oracles import ml_half, power_rule_exact

DOM = Domain(1.0, 2.0)


def test_power_rule_examples():
    p = OrderParams(0.5, 2.0)
    assert power_rule(PowerFunc(1.0, p, DOM), math.sqrt(2)) == pytest.approx(1.5957691216, rel=1e-10)
    pf = PowerFunc(0.5, p, DOM)
    for t in (1.2, 1.9):
        assert power_rule(pf, t) == pytest.approx(2**0.5 * math.gamma(1.5), rel=1e-14)
    assert power_rule(PowerFunc(1.2, p, DOM), 1.0) == 0
    with pytest.raises(DomainError):
        PowerFunc(0.9, OrderParams(1.5), DOM)


@given(st.floats(min_value=0.1, max_value=0.9), st.floats(min_value=0.2, max_value=3.0),
       st.floats(min_value=0.1, max_value=4.0), st.floats(min_value=1.01, max_value=2.0))
@settings(max_examples=50, deadline=None)
def test_power_rule_matches_extended_precision(alpha, rho, v, t):
    p = OrderParams(alpha, rho)
    s = t**rho - 1.0
    assert power_rule(PowerFunc(v, p, DOM), t) == pytest.approx(power_rule_exact(v, alpha, rho, s), rel=1e-12)


def test_power_rule_rho_one_is_classical():
    p = OrderParams(0.4)
    v, t = 2.5, 1.7
    assert power_rule(PowerFunc(v, p, DOM), t) == pytest.approx(math.gamma(v + 1) / math.gamma(v + 0.6) * 0.7 ** 2.1, rel=1e-14)


def test_power_function_right_side():
    p = OrderParams(0.5, 2.0, "right")
    pf = PowerFunc(1.5, p, DOM)
    assert pf(1.5) == pytest.approx((4 - 2.25) ** 1.5)
    # x_(1) ~ s**0.5 is not smooth at the anchor, so the quadrature is below second order
    assert caputo_deriv(pf.expr(), p, DOM, 1.5, N=2048).value == pytest.approx(power_rule(pf, 1.5), rel=1e-5)


def test_ml_eigenpair_examples():
    p = OrderParams(0.5)
    assert ml_eigenpair(0.0, p, DOM, 1.7) == (1.0, 0.0)
    assert ml_eigenpair(0.8, OrderParams(0.3, 2.0), DOM, 1.0) == pytest.approx((1.0, 0.8 * 2**0.3))
    value, deriv = ml_eigenpair(1.0, p, DOM, 2.0)
    assert value == pytest.approx(ml_half(1.0), rel=1e-13)
    assert value == pytest.approx(5.00898008076, rel=1e-11)
    assert deriv == value


@given(st.floats(min_value=-1.0, max_value=1.0).filter(lambda v: abs(v) > 1e-3), st.floats(min_value=0.1, max_value=1.9).filter(lambda a: abs(a - 1) > 1e-3),
       st.floats(min_value=0.2, max_value=3.0), st.floats(min_value=1.0, max_value=2.0))
@settings(max_examples=50, deadline=None)
def test_ml_eigenpair_ratio(lam, alpha, rho, t):
    value, deriv = ml_eigenpair(lam, OrderParams(alpha, rho), DOM, t)
    assert deriv / value == pytest.approx(lam * rho**alpha, rel=1e-14)


def test_taylor_remainder_examples():
    x = FuncSpec.from_expr("exp(t)")
    assert taylor_remainder(x, OrderParams(0.5), DOM, 1.6) == pytest.approx(math.exp(1.6) - math.e, rel=1e-14)
    assert taylor_remainder(FuncSpec.from_expr("(t-1)^2"), OrderParams(1.5), DOM, 1.8) == pytest.approx(0.64, rel=1e-13)
    assert taylor_remainder(FuncSpec.from_expr("3.25"), OrderParams(1.5, 0.5), DOM, 1.8) == 0
    # right side: x(t) - x(b) + (b - t) x'(b) for n = 2, rho = 1
    r = taylor_remainder(FuncSpec.from_expr("t^3"), OrderParams(1.5, 1.0, "right"), DOM, 1.5)
    assert r == pytest.approx(1.5**3 - 8 + 0.5 * 12, rel=1e-13)


@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=-3, max_value=3), st.floats(min_value=0.2, max_value=3.0),
       st.sampled_from(["left", "right"]), st.floats(min_value=1.0, max_value=2.0))
@settings(max_examples=60, deadline=None)
def test_taylor_remainder_of_low_degree_polynomial(c0, c1, rho, side, t):
    anchor = 1.0 if side == "left" else 2.0
    x = FuncSpec.from_expr(f"({c0!r}) + ({c1!r})*(t^{rho!r} - {anchor ** rho!r})")
    assert abs(taylor_remainder(x, OrderParams(1.5, rho, side), DOM, t)) <= 1e-12 * (1 + abs(c0) + abs(c1) * 2**rho)
