import math

import pytest
from hypothesis import given, strategies as st

from lpvgain import expr
from lpvgain.errors import ExprDomainError, ExprParseError


def ev(text, *rho, arity=None):
    if arity is None:
        arity = len(rho)
    return expr.evaluate(expr.parse(text, arity), rho)


def test_precedence_mul_over_add():
    assert ev("1+2*3") == 7.0
    assert ev("2*3+1") == 7.0


def test_precedence_power_over_mul():
    assert ev("2*3^2") == 18.0


def test_unary_minus_binds_looser_than_power():
    assert ev("-2^2") == -4.0


def test_left_associativity():
    assert ev("10-4-3") == 3.0
    assert ev("16/4/2") == 2.0


def test_parentheses():
    assert ev("(1+2)*3") == 9.0
    assert ev("2^(1+1)") == 4.0


def test_variables_one_based():
    assert ev("r1+2*r2", 3.0, 5.0) == 13.0


def test_functions():
    assert ev("sin(0)") == 0.0
    assert ev("cos(0)") == 1.0
    assert abs(ev("exp(1)") - math.e) < 1e-15
    assert ev("sqrt(9)") == 3.0
    assert ev("abs(-4)") == 4.0


def test_parse_error_reports_offset():
    with pytest.raises(ExprParseError) as ei:
        expr.parse("1+*2", 1)
    assert ei.value.offset == 2


def test_unknown_variable_out_of_arity():
    with pytest.raises(ExprParseError):
        expr.parse("r2", 1)


def test_unknown_function():
    with pytest.raises(ExprParseError):
        expr.parse("tan(1)", 1)


def test_sqrt_negative_is_domain_error():
    with pytest.raises(ExprDomainError) as ei:
        ev("sqrt(r1-10)", 1.0)
    assert "sqrt" in str(ei.value)


def test_division_by_zero_reports_subexpression():
    with pytest.raises(ExprDomainError) as ei:
        ev("1/(r1-2)", 2.0)
    assert "r1" in str(ei.value)


def test_fractional_power_of_negative_base():
    with pytest.raises(ExprDomainError):
        ev("(-2)^0.5")
    assert ev("(-2)^2") == 4.0


# random expression trees for the roundtrip property
def _trees(depth):
    leaf = st.one_of(
        st.floats(min_value=0.0, max_value=10.0, allow_nan=False).map(expr.Num),
        st.integers(min_value=1, max_value=3).map(expr.Var),
    )
    if depth == 0:
        return leaf
    sub = _trees(depth - 1)
    return st.one_of(
        leaf,
        sub.map(expr.Neg),
        st.tuples(st.sampled_from("+-*/"), sub, sub).map(
            lambda t: expr.BinOp(t[0], t[1], t[2])
        ),
        st.tuples(st.sampled_from(["sin", "cos", "exp", "abs"]), sub).map(
            lambda t: expr.Call(t[0], t[1])
        ),
    )


@given(_trees(3))
def test_pretty_parse_roundtrip(tree):
    text = expr.pretty(tree)
    assert expr.parse(text, 3) == tree


@given(_trees(3), st.lists(st.floats(0.1, 5.0), min_size=3, max_size=3))
def test_roundtrip_preserves_value(tree, rho):
    text = expr.pretty(tree)
    try:
        v1 = expr.evaluate(tree, rho)
    except ExprDomainError:
        return
    v2 = expr.evaluate(expr.parse(text, 3), rho)
    assert v1 == v2 or (math.isnan(v1) and math.isnan(v2))
