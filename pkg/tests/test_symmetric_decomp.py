import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import least_squares_oracle, naive_sigma
from setcalc.calculus import SetFunction, linear_sum
from setcalc.errors import SingularGramError
from setcalc.finite_core import FiniteUniverse
from setcalc.symmetric_decomp import (
    ElementValues,
    assignments,
    count_compositions,
    count_suite_variants,
    decompose,
    elementary_symmetric,
    elementary_symmetric_all,
    enumerate_compositions,
    inner_product,
    orthogonality_residuals,
    residual_sum_of_squares,
    sigma_function,
    sigma_table,
)

X123 = ElementValues.of((1, 2, 3))


def test_sigma_examples():
    full = X123.universe.full
    assert [elementary_symmetric(full, X123, k) for k in (1, 2, 3)] == [6, 11, 6]
    assert elementary_symmetric(X123.universe.empty, X123, 2) == 0
    assert elementary_symmetric(X123.universe.empty, X123, 0) == 1
    with pytest.raises(ValueError):
        elementary_symmetric(full, X123, 4)


def test_sigma1_is_linear_sum():
    rng = np.random.default_rng(0)
    vals = ElementValues.of(tuple(rng.normal(size=8)))
    ls = linear_sum(vals.values)
    for _ in range(100):
        A = vals.universe.random_subset(rng)
        assert elementary_symmetric(A, vals, 1) == pytest.approx(ls(A), abs=1e-12)


def test_sigma_table_matches_naive():
    vals = ElementValues.of((Fraction(1, 2), 2, Fraction(-3, 4), 5))
    table = sigma_table(vals, exact=True)
    for A in vals.universe.subsets():
        xs = vals.of_subset(A)
        assert list(table[A.mask]) == [naive_sigma(xs, k) for k in range(5)]


def test_counts():
    assert count_compositions(3, 2) == 6
    assert count_compositions(4, 4) == 24
    assert count_compositions(4, 2) == 12
    with pytest.raises(ValueError):
        count_compositions(2, 3)
    assert [count_suite_variants(n) for n in (1, 3, 4)] == [1, 15, 64]


def test_example1_compositions():
    funcs = enumerate_compositions("t1^2 + t2^3", X123)
    assert len(funcs) == count_compositions(3, 2) == 6
    assert funcs[0].name == "σ1^2 + σ2^3"
    assert [f.name for f in funcs] == [
        "σ1^2 + σ2^3", "σ2^2 + σ1^3", "σ1^2 + σ3^3",
        "σ3^2 + σ1^3", "σ2^2 + σ3^3", "σ3^2 + σ2^3",
    ]
    ones = ElementValues.of((1, 1, 1))
    assert enumerate_compositions("t1^2 + t2^3", ones)[0](ones.universe.full) == 36


def test_lexicographic_order_is_a_permutation_of_grouped_order():
    grouped = list(assignments(4, 2, "grouped"))
    lex = list(assignments(4, 2, "lexicographic"))
    assert lex == sorted(grouped) and len(set(grouped)) == 12


def test_single_variable_phi():
    funcs = enumerate_compositions("t1", ElementValues.of((1, 2)))
    assert [f.name for f in funcs] == ["σ1", "σ2"]


def test_inner_product_examples():
    vals = ElementValues.of((1, 1))
    s1 = sigma_function(1, vals)
    assert inner_product(s1, s1, vals.universe) == 6
    assert inner_product(s1, SetFunction(lambda A: 0), vals.universe) == 0


def test_decompose_exact_recovery():
    F = SetFunction(lambda A: 2 * elementary_symmetric(A, X123, 1) + 3 * elementary_symmetric(A, X123, 2))
    res = decompose(F, X123, exact=True)
    assert res.coefficients == (2, 3, 0) and res.residual == 0
    res = decompose(F, X123)
    assert np.allclose(res.coefficients, (2, 3, 0), atol=1e-10) and res.residual < 1e-18


def test_decompose_basis_element():
    res = decompose(sigma_function(1, X123), X123, exact=True)
    assert res.coefficients == (1, 0, 0) and res.residual == 0


def test_odd_parity_is_least_squares_optimal():
    F = SetFunction(lambda A: len(A) % 2)
    res = decompose(F, X123)
    rng = np.random.default_rng(1)
    base = np.array(res.coefficients)
    for _ in range(1000):
        trial = base + rng.uniform(-10, 10, base.shape)
        assert residual_sum_of_squares(F, X123, trial, res.orders) > res.residual
    assert max(abs(r) for r in orthogonality_residuals(F, res)) < 1e-8


def test_matches_lstsq_oracle():
    rng = np.random.default_rng(2)
    vals = ElementValues.of(tuple(rng.uniform(0.5, 1.5, 6)))
    table = rng.normal(size=64)
    F = SetFunction(lambda A: table[A.mask])
    res = decompose(F, vals, include_unit=True)
    subsets = list(vals.universe.subsets())
    cols = [[elementary_symmetric_all(A, vals)[k] for A in subsets] for k in range(7)]
    assert np.allclose(res.coefficients, least_squares_oracle(cols, table), atol=1e-8)


def test_unit_function_fits_constant_offset():
    F = SetFunction(lambda A: 5 + elementary_symmetric(A, X123, 3))
    res = decompose(F, X123, include_unit=True, exact=True)
    assert res.coefficients == (5, 0, 0, 1) and res.residual == 0


def test_singular_gram():
    vals = ElementValues.of((0, 0, 0))
    with pytest.raises(SingularGramError):
        decompose(sigma_function(1, vals), vals)


def test_idempotent():
    F = SetFunction(lambda A: float(len(A) ** 2))
    res = decompose(F, X123)
    again = decompose(res.as_set_function(), X123)
    assert np.allclose(res.coefficients, again.coefficients, atol=1e-9)


def test_permutation_invariance():
    xs = (1.5, -2.0, 0.5, 3.0)
    vals = ElementValues.of(xs)
    for perm in itertools.permutations(range(4)):
        pv = ElementValues.of(tuple(xs[i] for i in perm))
        for A in vals.universe.subsets():
            pA = pv.universe.from_indices([perm.index(i) for i in A.indices()])
            assert elementary_symmetric_all(pA, pv) == pytest.approx(elementary_symmetric_all(A, vals))


def test_exact_result_json():
    doc = decompose(sigma_function(2, X123), X123, exact=True).to_json()
    assert doc["coefficients"] == {"c1": 0.0, "c2": 1.0, "c3": 0.0}


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3),
       st.lists(st.integers(1, 5), min_size=4, max_size=4, unique=True))
def test_exact_recovery_property(coefs, xs):
    vals = ElementValues.of(tuple(xs))
    F = SetFunction(lambda A: sum(c * elementary_symmetric(A, vals, k + 1) for k, c in enumerate(coefs)))
    res = decompose(F, vals, exact=True)
    assert list(res.coefficients[:3]) == coefs and res.coefficients[3] == 0
    assert res.residual == 0


def test_inner_product_symmetric():
    rng = np.random.default_rng(4)
    u = FiniteUniverse.unit(5)
    t1, t2 = rng.normal(size=32), rng.normal(size=32)
    F1 = SetFunction(lambda A: t1[A.mask])
    F2 = SetFunction(lambda A: t2[A.mask])
    assert inner_product(F1, F2, u) == inner_product(F2, F1, u)
