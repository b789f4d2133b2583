import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setcalc.errors import PartialFractalOverlapError
from setcalc.hybrid_measure import (
    FractalComponent,
    HybridSet,
    Interval,
    IntervalSet,
    MeasureConfig,
    PointSet,
    PointWeight,
    caratheodory_measure,
    closed,
    closed_open,
    distance_hybrid,
    lebesgue_length,
    measure_hybrid,
    open_closed,
    sym_diff_hybrid,
)

CANTOR = FractalComponent.cantor()


def test_lebesgue_length_examples():
    assert lebesgue_length(IntervalSet.of(closed_open(0, 0.5))) == Fraction(1, 2)
    assert lebesgue_length(IntervalSet.of(open_closed(0, 0.25), closed(0.5, 1))) == Fraction(3, 4)
    assert lebesgue_length(IntervalSet()) == 0


def test_cantor_measure_and_dimension():
    assert CANTOR.dimension == pytest.approx(math.log(2) / math.log(3))
    assert caratheodory_measure(CANTOR) == pytest.approx(1.0)
    half = FractalComponent.cantor(0, 0.5)
    assert caratheodory_measure(half) == pytest.approx(0.5 ** (math.log(2) / math.log(3)))
    assert caratheodory_measure(half) == pytest.approx(0.6458, abs=1e-4)


@pytest.mark.parametrize("k,r", [(1, 0.5), (2, 0.6), (3, 0.5), (2, 0.0)])
def test_invalid_fractals(k, r):
    with pytest.raises(ValueError):
        FractalComponent(Fraction(0), Fraction(1), k, r)


def test_measure_eq2_example():
    A = HybridSet(IntervalSet.of(closed_open(0, 0.5)), (), PointSet((0.7, 0.9)))
    cfg = MeasureConfig(c=0.1)
    assert measure_hybrid(A, cfg, "eq2") == pytest.approx(0.7)


def test_empty_measure_is_zero():
    for mode in ("eq2", "eq3"):
        assert measure_hybrid(HybridSet(), MeasureConfig(), mode) == 0


def test_measure_eq3_cantor():
    A = HybridSet(IntervalSet(), (CANTOR,), PointSet())
    assert measure_hybrid(A, MeasureConfig(), "eq3") == pytest.approx(1.0)


def test_eq2_rejects_fractals():
    with pytest.raises(ValueError):
        measure_hybrid(HybridSet(IntervalSet(), (CANTOR,)), MeasureConfig(), "eq2")


def test_sym_diff_examples():
    A = HybridSet(IntervalSet.unit())
    B = HybridSet(IntervalSet.of(closed_open(0, 0.5)))
    C = sym_diff_hybrid(A, B)
    assert C.K == IntervalSet.of(closed(0.5, 1))
    assert sym_diff_hybrid(A, A) == HybridSet()
    X = HybridSet(IntervalSet(), (CANTOR,), PointSet((0.5,)))
    Y = HybridSet(IntervalSet(), (CANTOR,), PointSet())
    Z = sym_diff_hybrid(X, Y)
    assert Z.K == IntervalSet() and Z.fractals == () and Z.Q == PointSet((Fraction(1, 2),))


def test_distance_example():
    A = HybridSet(IntervalSet.unit())
    B = HybridSet(IntervalSet.of(closed_open(0, 0.5)))
    assert distance_hybrid(A, B, MeasureConfig(), "eq3") == pytest.approx(0.5)
    assert distance_hybrid(A, A, MeasureConfig(), "eq3") == 0


def test_partial_fractal_overlap_rejected():
    A = HybridSet(IntervalSet(), (FractalComponent.cantor(0, 0.5),))
    B = HybridSet(IntervalSet(), (FractalComponent.cantor(0.25, 1),))
    with pytest.raises(PartialFractalOverlapError):
        sym_diff_hybrid(A, B)


def test_disjoint_fractals_union():
    A = HybridSet(IntervalSet(), (FractalComponent.cantor(0, 0.25),))
    B = HybridSet(IntervalSet(), (FractalComponent.cantor(0.5, 1),))
    cfg = MeasureConfig()
    m = lambda S: measure_hybrid(S, cfg, "eq3")  # noqa: E731
    assert m(A | B) == pytest.approx(m(A) + m(B))
    assert m(A ^ B) == pytest.approx(m(A) + m(B))


def test_points_inside_intervals_are_counted_twice():
    A = HybridSet(IntervalSet.unit(), (), PointSet((0.5,)))
    assert measure_hybrid(A, MeasureConfig(), "eq3") == pytest.approx(2.0)


def test_point_weights():
    A = HybridSet(IntervalSet(), (), PointSet((0.0, 1.0)))
    cfg = MeasureConfig(H=PointWeight.exp_abs())
    assert measure_hybrid(A, cfg, "eq3") == pytest.approx(1 + math.exp(-1))


def test_json_round_trip():
    A = HybridSet(IntervalSet.of(Interval(Fraction(1, 3), Fraction(1, 2), False, True)),
                  (FractalComponent.cantor(Fraction(2, 3), 1),), PointSet((0.1,)))
    assert HybridSet.from_json(A.to_json()) == A
    cfg = MeasureConfig(alpha=(1, 2, 3), c=0.5, H=PointWeight.exp_abs())
    assert MeasureConfig.from_json(cfg.to_json()) == cfg


def test_degenerate_interval_rejected():
    with pytest.raises(ValueError):
        closed(0.5, 0.5)


def _interval_sets(draw_endpoints):
    pts = sorted(set(draw_endpoints))
    ivs = []
    for a, b in zip(pts[::2], pts[1::2]):
        ivs.append(Interval(Fraction(a, 16), Fraction(b, 16), bool(a % 2), bool(b % 3)))
    # neighbours may touch; canonicalization merges them
    return IntervalSet.of(*ivs)


endpoint_lists = st.lists(st.integers(0, 16), min_size=0, max_size=8)


@settings(max_examples=200, deadline=None)
@given(endpoint_lists, endpoint_lists, st.lists(st.integers(0, 16), max_size=4),
       st.lists(st.integers(0, 16), max_size=4))
def test_additivity_and_closure(ea, eb, qa, qb):
    A = HybridSet(_interval_sets(ea), (), PointSet(tuple(Fraction(q, 16) for q in qa)))
    B = HybridSet(_interval_sets(eb), (), PointSet(tuple(Fraction(q, 16) for q in qb)))
    cfg = MeasureConfig(alpha=(1, 2, 0.5))
    m = lambda S: measure_hybrid(S, cfg, "eq3")  # noqa: E731
    assert m(A | B) + m(A & B) == pytest.approx(m(A) + m(B), abs=1e-12)
    for S in (A | B, A & B, A - B, A ^ B):
        ivs = list(S.K)
        for x, y in zip(ivs, ivs[1:]):
            assert x.b <= y.a
    if A.issubset(B):
        assert m(A) <= m(B) + 1e-12
    assert m(A ^ B) <= m(A ^ HybridSet()) + m(HybridSet() ^ B) + 1e-12


def test_triangle_random_intervals():
    rng = np.random.default_rng(7)
    cfg = MeasureConfig()

    def rand_set():
        pts = sorted(set(Fraction(int(x), 64) for x in rng.integers(0, 65, 6)))
        ivs = [closed(a, b) for a, b in zip(pts[::2], pts[1::2])]
        return HybridSet(IntervalSet.of(*ivs))

    for _ in range(10_000 // 20):
        A, B, C = rand_set(), rand_set(), rand_set()
        d = lambda X, Y: distance_hybrid(X, Y, cfg, "eq3")  # noqa: E731
        assert d(A, B) <= d(A, C) + d(C, B) + 1e-12
