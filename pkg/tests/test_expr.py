import math

import pytest

from setcalc.expr import ExpressionError, parse, phi_expression


def test_powers_and_functions():
    e = parse("t1^2 + exp(t2) - sqrt(4)")
    assert e(3, 0) == pytest.approx(9 + 1 - 2)
    assert e.variables == ("t1", "t2") and e.arity == 2


def test_render_renames():
    e = phi_expression("t1^2 + t2^3")
    assert e.render({"t1": "σ2", "t2": "σ1"}) == "σ2^2 + σ1^3"


def test_unicode_operators():
    assert parse("x × 2 − 1", ["x"])(x=3) == 5


@pytest.mark.parametrize("text", [
    "__import__('os')", "t1 ** t2", "t1.real", "[t1]", "lambda: 1", "t1 if t1 else 2",
    "open(t1)", "y + 1", "t1 // 2",
])
def test_rejected(text):
    with pytest.raises(ExpressionError):
        parse(text)


def test_phi_needs_t_variables():
    with pytest.raises(ExpressionError):
        phi_expression("x + 1")
    with pytest.raises(ExpressionError):
        phi_expression("2")


def test_gap_in_arity():
    e = phi_expression("t3 + 1")
    assert e.arity == 3 and e(0, 0, 2) == 3


def test_missing_argument():
    with pytest.raises(ExpressionError):
        parse("t1 + t2")(1)


def test_log_and_abs():
    assert parse("log(abs(x))", ["x"])(x=-math.e) == pytest.approx(1)
