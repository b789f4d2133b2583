import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_measure
from setcalc.errors import UniverseMismatchError, UniverseTooLargeError
from setcalc.finite_core import (
    FiniteUniverse,
    distance,
    measure_finite,
    measure_table,
    measure_table_exact,
    subset_from_json,
    symmetric_difference,
)

U3 = FiniteUniverse.unit(3)


def test_unit_weights_count_elements():
    assert measure_finite(U3.subset(["w1", "w2"])) == 2


def test_empty_set_has_zero_measure():
    assert measure_finite(U3.empty) == 0


def test_weighted_full_set():
    u = FiniteUniverse(("a", "b", "c"), (0.5, 1.5, 2.0))
    assert measure_finite(u.full) == pytest.approx(4.0)


def test_symmetric_difference_examples():
    A = U3.subset(["w1", "w2"])
    B = U3.subset(["w2", "w3"])
    assert symmetric_difference(A, B) == U3.subset(["w1", "w3"])
    assert symmetric_difference(A, A) == U3.empty
    assert symmetric_difference(A, U3.empty) == A


def test_distance_examples():
    A = U3.subset(["w1"])
    assert distance(A, A) == 0
    assert distance(U3.subset(["w1"]), U3.subset(["w2"])) == 2


def test_triangle_exhaustive_small():
    u = FiniteUniverse(tuple("abcde"), (1, 2, 0.5, 3, 0.25))
    subs = list(u.subsets())
    for A in subs:
        for B in subs[::3]:
            for C in subs[::5]:
                assert distance(A, B) <= distance(A, C) + distance(C, B) + 1e-12


@pytest.mark.parametrize("weights", [(0, 1), (-1, 2), (float("nan"), 1)])
def test_nonpositive_weights_rejected(weights):
    with pytest.raises(ValueError):
        FiniteUniverse(("a", "b"), weights)


def test_duplicate_elements_rejected():
    with pytest.raises(ValueError):
        FiniteUniverse(("a", "a"), (1, 1))


def test_universe_mismatch():
    other = FiniteUniverse.unit(3, prefix="v")
    with pytest.raises(UniverseMismatchError):
        U3.full ^ other.full


def test_enumeration_cap():
    with pytest.raises(UniverseTooLargeError):
        list(FiniteUniverse.unit(25).subsets())


def test_exact_mode_is_rational():
    u = FiniteUniverse(("a", "b"), (Fraction(1, 3), Fraction(2, 3))).exact()
    assert measure_finite(u.full) == 1
    assert isinstance(measure_finite(u.subset(["a"])), Fraction)


def test_large_universe_measure_matches_naive():
    rng = np.random.default_rng(3)
    w = rng.uniform(0.1, 2, 100)
    u = FiniteUniverse.from_weights(list(w))
    A = u.random_subset(rng)
    assert measure_finite(A) == pytest.approx(naive_measure(dict(zip(u.elements, w)), A.names()))


def test_measure_tables_agree():
    u = FiniteUniverse(tuple("abcd"), (Fraction(1, 2), Fraction(1, 3), 2, Fraction(5, 7)))
    table = measure_table(u)
    nums, den = measure_table_exact(u)
    for A in u.subsets():
        assert table[A.mask] == pytest.approx(float(measure_finite(A)))
        assert Fraction(int(nums[A.mask]), den) == measure_finite(A.universe.exact().from_indices(A.indices()))


def test_json_round_trip():
    u = FiniteUniverse(("x", "y", "z"), (1, Fraction(1, 3), 2.5))
    doc = json.loads(json.dumps(u.to_json()))
    v = FiniteUniverse.from_json(doc)
    assert v == u
    A = u.subset(["z", "x"])
    assert A.to_json() == ["x", "z"]
    assert subset_from_json(v, A.to_json()) == v.subset(["x", "z"])


def test_array_round_trip():
    u = FiniteUniverse.unit(70)
    flags = np.zeros(70, dtype=bool)
    flags[[0, 5, 64, 69]] = True
    A = u.from_array(flags)
    assert A.indices() == [0, 5, 64, 69]
    assert np.array_equal(A.to_array(), flags)


masks = st.integers(min_value=0, max_value=(1 << 10) - 1)


@settings(max_examples=200, deadline=None)
@given(masks, masks, masks)
def test_algebra_properties(a, b, c):
    u = FiniteUniverse.unit(10)
    A, B, C = (u.from_indices([i for i in range(10) if x >> i & 1]) for x in (a, b, c))
    assert (A ^ B) ^ C == A ^ (B ^ C)
    assert A ^ B == B ^ A
    assert A ^ B ^ B == A
    assert measure_finite(A | B) + measure_finite(A & B) == measure_finite(A) + measure_finite(B)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=12), st.data())
def test_metric_axioms_random(weights, data):
    u = FiniteUniverse.from_weights(weights)
    n = len(weights)
    pick = st.integers(0, (1 << n) - 1)
    A, B, C = (u.from_indices([i for i in range(n) if data.draw(pick) >> i & 1]) for _ in range(3))
    assert distance(A, B) == pytest.approx(distance(B, A))
    assert (distance(A, B) == 0) == (A == B)
    assert distance(A, B) <= distance(A, C) + distance(C, B) + 1e-9
