"""Integration by a hybrid measure using level sets of the integrand.

The range [α, β] of ``f`` on the set is cut into ``n`` equal levels and the
measure of each level set ``e_v = {x : y_v <= f(x) < y_{v+1}}`` is
computed: exactly on isolated points, and on intervals by inverting ``f``
on pieces where it is monotone (bisection to 1e-12).  The top level is
closed so that the level sets cover the whole set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .calculus import difference_quotient
from .errors import (
    FractalIntegrationError,
    InconclusiveError,
    NonConvergentError,
    UnboundedIntegrandError,
)
from .expr import parse
from .hybrid_measure import (
    HybridSet,
    Interval,
    IntervalSet,
    MeasureConfig,
    PointSet,
    PointWeight,
    closed,
    interval_part_weight,
    measure_hybrid,
    point_part_weight,
)

BISECTION_TOL = 1e-12
FALLBACK_CELLS = 10_000


@dataclass(frozen=True)
class Integrand:
    """Pointwise integrand ``f(x)``.

    ``breakpoints`` lists points between which ``f`` is monotone; without
    them interval parts fall back to a midpoint grid and results are
    flagged approximate.  ``func`` should accept numpy arrays.
    """

    func: Callable
    breakpoints: tuple | None = None
    name: str = "f"

    @classmethod
    def from_expr(cls, text: str, breakpoints: Iterable[float] | None = None) -> Integrand:
        expr = parse(text, ["x"])
        return cls(lambda x: expr(x=x), None if breakpoints is None else tuple(breakpoints), text)

    @classmethod
    def constant(cls, c: float) -> Integrand:
        return cls(lambda x: c, (), f"{c}")

    @classmethod
    def piecewise_linear(cls, xs: Sequence[float], ys: Sequence[float]) -> Integrand:
        xs, ys = np.asarray(xs, float), np.asarray(ys, float)
        return cls(lambda x: np.interp(x, xs, ys), tuple(xs), "piecewise_linear")

    def __call__(self, x):
        return self.func(x)

    def values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.func(x), dtype=float), x.shape).copy()

    def at(self, x) -> float:
        return float(self.values(np.array([float(x)]))[0])

    def pieces(self, a: float, b: float) -> list[tuple[float, float]]:
        cuts = [a] + sorted(p for p in (self.breakpoints or ()) if a < p < b) + [b]
        return list(zip(cuts, cuts[1:]))


def _as_integrand(f) -> Integrand:
    if isinstance(f, Integrand):
        return f
    if isinstance(f, str):
        return Integrand.from_expr(f)
    return Integrand(f)


def bounds(f: Integrand, A: HybridSet) -> tuple[float, float]:
    """inf and sup of ``f`` over the interval and point parts of ``A``."""
    vals = []
    for iv in A.K:
        a, b = float(iv.a), float(iv.b)
        if f.breakpoints is None:
            grid = np.linspace(a, b, FALLBACK_CELLS + 1)
            vals.extend(f.values(grid))
        else:
            ends = sorted({a, b} | {p for p in f.breakpoints if a < p < b})
            vals.extend(f.values(np.array(ends)))
    if A.Q:
        vals.extend(f.values(np.array([float(x) for x in A.Q])))
    if not vals:
        return 0.0, 0.0
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise UnboundedIntegrandError(f"{f.name} is not bounded on the set")
    return lo, hi


def _distribution(f: Integrand, p: float, q: float, y: np.ndarray) -> np.ndarray:
    """Length of ``{x in [p, q] : f(x) < y}`` for each level ``y`` (f monotone on [p, q])."""
    fp, fq = f.at(p), f.at(q)
    width = q - p
    if fp == fq:
        return np.where(fp < y, width, 0.0)
    increasing = fp < fq
    flo, fhi = min(fp, fq), max(fp, fq)
    out = np.where(y <= flo, 0.0, width)
    mid = (y > flo) & (y <= fhi)
    if not mid.any():
        return out
    ym = y[mid]
    lo = np.full(ym.shape, p)
    hi = np.full(ym.shape, q)
    iters = max(1, math.ceil(math.log2(max(width, BISECTION_TOL) / BISECTION_TOL)) + 1)
    for _ in range(iters):
        c = (lo + hi) / 2
        below = f.values(c) < ym
        if increasing:
            lo = np.where(below, c, lo)
            hi = np.where(below, hi, c)
        else:
            hi = np.where(below, c, hi)
            lo = np.where(below, lo, c)
    cross = (lo + hi) / 2
    out[mid] = (cross - p) if increasing else (q - cross)
    return out


def _grid_distribution(f: Integrand, a: float, b: float, y: np.ndarray) -> np.ndarray:
    cells = FALLBACK_CELLS
    h = (b - a) / cells
    vals = np.sort(f.values(a + h * (np.arange(cells) + 0.5)))
    return h * np.searchsorted(vals, y, side="left")


@dataclass(frozen=True)
class LebesgueSums:
    lower: float
    upper: float
    levels: np.ndarray
    level_measures: np.ndarray
    total_measure: float
    converged: bool
    approximate: bool

    @property
    def J(self) -> float | None:
        return (self.lower + self.upper) / 2 if self.converged else None

    @property
    def midpoint(self) -> float:
        return (self.lower + self.upper) / 2

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "J": self.J,
            "converged": self.converged,
            "approximate": self.approximate,
        }


def integrate_scheme(f, A: HybridSet, cfg: MeasureConfig | None = None, n_levels: int = 1000,
                     mode: str = "eq3", tolerance: float = 1e-3,
                     double_count: bool = True) -> LebesgueSums:
    """Lower and upper level-set sums of ``∫_A f dm``.

    ``J`` is their midpoint, reported when ``upper − lower <= tolerance``.
    ``double_count=False`` ignores points of ``Q`` that lie inside ``K``.
    """
    f = _as_integrand(f)
    cfg = cfg or MeasureConfig()
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    if A.fractals:
        raise FractalIntegrationError("integration over fractal components is not defined")
    wK = interval_part_weight(cfg, mode)
    wQ = point_part_weight(cfg, mode)
    points = [x for x in A.Q if double_count or x not in A.K]
    B = HybridSet(A.K, (), PointSet(tuple(points)))
    total = measure_hybrid(B, cfg, mode) if B else 0.0
    alpha, beta = bounds(f, B)
    if not B:
        return LebesgueSums(0.0, 0.0, np.array([0.0, 0.0]), np.array([0.0]), 0.0, True, False)
    if alpha == beta:
        value = alpha * total
        return LebesgueSums(value, value, np.array([alpha, beta]), np.array([total]),
                            total, True, False)
    y = alpha + (beta - alpha) * np.arange(n_levels + 1) / n_levels
    y[-1] = beta
    # cumulative measure of {f < y_v}, v = 0..n
    below = np.zeros(n_levels + 1)
    approximate = False
    for iv in B.K:
        a, b = float(iv.a), float(iv.b)
        if f.breakpoints is None:
            approximate = True
            below += wK * _grid_distribution(f, a, b, y)
        else:
            for p, q in f.pieces(a, b):
                below += wK * _distribution(f, p, q, y)
    interval_total = wK * float(B.K.length)
    level_measures = np.diff(below)
    # close the top level: points with f == beta belong to it
    level_measures[-1] += interval_total - below[-1]
    if points:
        fx = f.values(np.array([float(x) for x in points]))
        idx = np.searchsorted(y, fx, side="right") - 1
        idx = np.clip(idx, 0, n_levels - 1)
        for v, x in zip(idx, points):
            level_measures[v] += wQ * cfg.H(x)
    lower = math.fsum(y[:-1] * level_measures)
    upper = math.fsum(y[1:] * level_measures)
    return LebesgueSums(lower, upper, y, level_measures, total,
                        upper - lower <= tolerance * (1 + 1e-9), approximate)


@dataclass(frozen=True)
class DiscreteSum:
    value: float
    n_terms: int
    last_term: float


def integers() -> Iterable[int]:
    """0, 1, −1, 2, −2, ..."""
    yield 0
    for k in itertools.count(1):
        yield k
        yield -k


def integrate_discrete(f, Q: Iterable, c: float = 1.0, H: Callable = PointWeight.one(),
                       tol: float = 1e-12, max_terms: int = 1_000_000,
                       patience: int = 4) -> DiscreteSum:
    """``c · Σ f(x)·H(x)`` over the points of ``Q``.

    Finite collections are summed completely.  For an infinite iterator the
    sum stops once ``patience`` consecutive terms are below ``tol``;
    :class:`NonConvergentError` is raised after ``max_terms`` terms.
    """
    f = _as_integrand(f)
    terms = []
    quiet = 0
    finite = isinstance(Q, (PointSet, list, tuple, set, frozenset))
    last = 0.0
    for count, x in enumerate(Q, start=1):
        last = f.at(x) * H(x)
        terms.append(last)
        if not finite:
            quiet = quiet + 1 if abs(last) < tol else 0
            if quiet >= patience:
                break
            if count >= max_terms:
                raise NonConvergentError(f"series not below {tol} after {max_terms} terms")
    return DiscreteSum(c * math.fsum(terms), len(terms), abs(c * last))


@dataclass(frozen=True)
class MixedIntegral:
    value: float
    scheme: LebesgueSums
    discrete: DiscreteSum


def integrate_mixed(f, a, b, Q: Iterable = (), c: float = 1.0, H: Callable = PointWeight.one(),
                    n_levels: int = 1000, double_count: bool = True,
                    tolerance: float = 1e-3) -> MixedIntegral:
    """``∫_a^b f dμ + c·Σ_{x∈Q} f(x)H(x)`` with μ the Lebesgue measure.

    Points of ``Q`` inside [a, b] contribute to the sum unless
    ``double_count`` is false.
    """
    f = _as_integrand(f)
    K = IntervalSet((closed(a, b),))
    scheme = integrate_scheme(f, HybridSet(K), MeasureConfig(), n_levels, "eq2", tolerance)
    pts = [x for x in Q if double_count or not (a <= x <= b)]
    disc = integrate_discrete(f, pts, c, H)
    return MixedIntegral(scheme.midpoint + disc.value, scheme, disc)


@dataclass(frozen=True)
class MeanValueBounds:
    lower_bound: float
    J: float
    upper_bound: float
    holds: bool


def mean_value_bounds(f, A: HybridSet, cfg: MeasureConfig | None = None, mode: str = "eq3",
                      n_levels: int = 1000, slack: float = 1e-12) -> MeanValueBounds:
    """Check ``inf f · m(A) <= ∫_A f dm <= sup f · m(A)``."""
    f = _as_integrand(f)
    sums = integrate_scheme(f, A, cfg, n_levels, mode)
    alpha, beta = bounds(f, A)
    m = sums.total_measure
    lo, J, hi = alpha * m, sums.midpoint, beta * m
    scale = slack * max(1.0, abs(lo), abs(hi))
    return MeanValueBounds(lo, J, hi, lo - scale <= J <= hi + scale)


# --------------------------------------------------------------------------
# Radon-Nikodym: dJ/dm along sets shrinking to a point recovers f
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RadonNikodymReport:
    estimate: float
    quotients: tuple
    radii: tuple


def radon_nikodym_check(f, x, cfg: MeasureConfig | None = None, mode: str = "eq2",
                        A: HybridSet | None = None, radii: Sequence[float] | None = None,
                        with_point: bool = False, n_levels: int = 2000,
                        tolerance: float = 1e-3) -> RadonNikodymReport:
    """Derivative of ``J(S) = ∫_S f dm`` by ``m`` along ``Bₙ → {x}``.

    ``Bₙ`` is ``[x − rₙ, x + rₙ] ∩ [0, 1]``, joined with ``{x}`` when
    ``with_point`` is set.  The estimate is the last quotient; if the last
    two quotients differ by more than ``tolerance`` the result is
    :class:`InconclusiveError`.
    """
    f = _as_integrand(f)
    cfg = cfg or MeasureConfig()
    A = A or HybridSet()
    radii = tuple(radii) if radii is not None else tuple(0.05 * 2.0 ** -j for j in range(12))
    J = lambda S: integrate_scheme(f, S, cfg, n_levels, mode).midpoint  # noqa: E731
    m = lambda S: measure_hybrid(S, cfg, mode)  # noqa: E731
    xf = float(x)
    quotients = []
    for r in radii:
        lo, hi = max(0.0, xf - r), min(1.0, xf + r)
        B = HybridSet(IntervalSet((Interval(lo, hi),)), (), PointSet((x,) if with_point else ()))
        quotients.append(difference_quotient(J, m, A, B))
    if len(quotients) >= 2 and abs(quotients[-1] - quotients[-2]) > tolerance:
        raise InconclusiveError(f"quotients not settled: {quotients[-2]} vs {quotients[-1]}")
    return RadonNikodymReport(quotients[-1], tuple(quotients), radii)


def radon_nikodym_finite(f_values, A, x):
    """Finite-universe version: ``J(S) = Σ_{ω∈S} f(ω)H(ω)`` differentiated along ``Bₙ = {x}``.

    The quotient is ``f(x)`` for every ``n``; with exact weights and values
    it is exact.
    """
    u = A.universe
    weights = u.weights
    if isinstance(f_values, dict):
        fv = [f_values[e] for e in u.elements]
    else:
        fv = list(f_values)

    def J(S):
        return sum((fv[i] * weights[i] for i in S.indices()), 0)

    from .finite_core import measure_finite

    return difference_quotient(J, measure_finite, A, u.singleton(x))
