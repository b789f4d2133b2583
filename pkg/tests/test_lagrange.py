import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setcalc.calculus import SetFunction, affine_in_measure, linear_sum, measure_function, measure_squared
from setcalc.errors import MultivaluedCurveError, NoWitnessError, ZeroDenominatorError
from setcalc.finite_core import FiniteUniverse, measure_finite
from setcalc.lagrange import (
    build_gamma,
    derivative_bridge_check,
    lightest_schedule,
    mean_value_theta,
)

U6 = FiniteUniverse.unit(6)


def test_identity_curve():
    g = build_gamma(measure_function(), U6)
    assert g.single_valued
    assert np.array_equal(g.x, g.y)
    assert g.bucket_x.tolist() == list(range(7))


def test_square_curve_pointwise():
    g = build_gamma(measure_squared(), U6)
    assert g.single_valued and np.array_equal(g.y, g.x**2)
    assert len(g.x) == 64


def test_linear_sum_multivalued():
    g = build_gamma(linear_sum([1, 2, 3, 4, 5, 6]), U6)
    assert not g.single_valued
    P, Q = g.witness
    assert measure_finite(P) == measure_finite(Q) and sum(P.indices()) != sum(Q.indices())
    with pytest.raises(MultivaluedCurveError):
        mean_value_theta(g, U6.subset(["w1"]), U6.subset(["w1", "w2", "w3"]))


def test_theta_examples():
    g = build_gamma(measure_function(), U6)
    assert mean_value_theta(g, U6.subset(["w1"]), U6.subset(["w2", "w3"])) == 0.5
    g = build_gamma(measure_squared(), U6)
    assert mean_value_theta(g, U6.subset(["w1"]), U6.subset(["w1", "w2", "w3"])) == pytest.approx(0.5)


def test_theta_without_through_measure_uses_pchip():
    F = SetFunction(lambda A: measure_finite(A) ** 2)
    g = build_gamma(F, U6)
    theta = mean_value_theta(g, U6.subset(["w1"]), U6.subset(["w1", "w2", "w3"]))
    assert 0 <= theta <= 1
    q = (9 - 1) / 2
    assert g.derivative(1 + 2 * theta) == pytest.approx(q, abs=1e-6)


def test_kink_has_no_witness():
    F = SetFunction(lambda A: abs(measure_finite(A) - 2))
    g = build_gamma(F, U6, interpolation="linear")
    with pytest.raises(NoWitnessError):
        mean_value_theta(g, U6.subset(["w1"]), U6.subset(["w1", "w2", "w3"]))


def test_equal_measure_rejected():
    g = build_gamma(measure_function(), U6)
    with pytest.raises(ZeroDenominatorError):
        mean_value_theta(g, U6.subset(["w1"]), U6.subset(["w2"]))


def test_bad_interpolation():
    with pytest.raises(ValueError):
        build_gamma(measure_function(), U6, interpolation="spline")


def test_sampled_universe():
    u = FiniteUniverse.unit(20)
    g = build_gamma(measure_squared(), u, samples=2000, rng=np.random.default_rng(0))
    assert len(g.x) == 2002 and g.single_valued
    assert g.bucket_x[0] == 0 and g.bucket_x[-1] == 20


TINY = FiniteUniverse(("a", "b", "c", "d", "e"), (1.0, 2.0, 0.5, 1.5, 1e-7))


@pytest.mark.parametrize("F,expected", [
    (measure_squared(), lambda mA: 2 * mA),
    (measure_function(), lambda mA: 1.0),
    (affine_in_measure(3, -1), lambda mA: 3.0),
])
def test_bridge(F, expected):
    A = TINY.subset(["a", "c"])
    rep = derivative_bridge_check(F, A)
    assert rep.holds
    assert rep.curve_derivative == pytest.approx(expected(1.5))


def test_lightest_schedule():
    seq = lightest_schedule(TINY)
    assert all(B == TINY.subset(["e"]) for B in seq)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 63), st.integers(0, 63))
def test_theta_in_unit_interval(a, b):
    A = U6.from_indices([i for i in range(6) if a >> i & 1])
    B = U6.from_indices([i for i in range(6) if b >> i & 1])
    if len(A) == len(B):
        return
    g = build_gamma(measure_squared(), U6)
    theta = mean_value_theta(g, A, B)
    assert 0 <= theta <= 1
    xa, xb = len(A), len(B)
    assert 2 * (xa + theta * (xb - xa)) == pytest.approx(xa + xb, abs=1e-6)
