"""Derivatives of set functions with respect to a measure.

Everything here is generic over the set type: anything supporting ``^``
(symmetric difference) and truthiness (emptiness) works, so the same code
serves :class:`~setcalc.finite_core.Subset` and
:class:`~setcalc.hybrid_measure.HybridSet`.  The measure is any callable
``set -> real``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .convergence import SetSequence, borel_limits
from .errors import (
    InconclusiveError,
    MinimalityUnverifiedError,
    NotContinualError,
    NoWitnessError,
    ZeroDenominatorError,
)
from .finite_core import FiniteUniverse, Subset, measure_finite


@dataclass(frozen=True)
class SetFunction:
    """A real-valued function of a set.

    ``continual`` marks functions known to satisfy the continuity
    definition; on a finite universe with positive weights every function
    does, but the flag is opt-in so the caller states it.
    ``through_measure`` optionally records ``F(A) = g(m(A))`` as ``(g, g')``.
    """

    evaluator: Callable
    name: str = "F"
    continual: bool = False
    closed_form: str | None = None
    through_measure: tuple | None = field(default=None, compare=False)

    def __call__(self, A):
        return self.evaluator(A)

    def _lift(self, other, op, sym: str) -> SetFunction:
        if isinstance(other, SetFunction):
            return SetFunction(
                lambda A, f=self, g=other: op(f(A), g(A)),
                f"({self.name} {sym} {other.name})",
                self.continual and other.continual,
            )
        return SetFunction(
            lambda A, f=self, c=other: op(f(A), c),
            f"({self.name} {sym} {other})",
            self.continual,
        )

    def __add__(self, other):
        return self._lift(other, lambda x, y: x + y, "+")

    def __sub__(self, other):
        return self._lift(other, lambda x, y: x - y, "-")

    def __mul__(self, other):
        return self._lift(other, lambda x, y: x * y, "*")

    def __truediv__(self, other):
        return self._lift(other, lambda x, y: x / y, "/")

    def __rmul__(self, c):
        return SetFunction(lambda A, f=self: c * f(A), f"{c}*{self.name}", self.continual)

    __radd__ = __add__

    def compose(self, phi: Callable, name: str = "phi") -> SetFunction:
        return SetFunction(lambda A, f=self: phi(f(A)), f"{name}({self.name})", self.continual)


# registered closed-form family -------------------------------------------------


def measure_function(m: Callable = measure_finite) -> SetFunction:
    return SetFunction(m, "measure", True, "m(A)",
                       (lambda x: x, lambda x: 1))


def measure_squared(m: Callable = measure_finite) -> SetFunction:
    return SetFunction(lambda A: m(A) ** 2, "measure_squared", True, "m(A)^2",
                       (lambda x: x * x, lambda x: 2 * x))


def affine_in_measure(c, d, m: Callable = measure_finite) -> SetFunction:
    return SetFunction(lambda A: c * m(A) + d, f"{c}*m+{d}", True, f"{c}*m(A) + {d}",
                       (lambda x: c * x + d, lambda x: c))


def constant(value) -> SetFunction:
    return SetFunction(lambda A: value, "constant", True, f"{value}",
                       (lambda x: value, lambda x: 0))


def linear_sum(values: Mapping | Sequence) -> SetFunction:
    """``Σ_{ω∈A} v(ω)`` with ``values`` indexed by element position or name."""

    def evaluate(A: Subset):
        if isinstance(values, Mapping):
            return sum((values[e] for e in A), 0)
        return sum((values[i] for i in A.indices()), 0)

    return SetFunction(evaluate, "linear_sum", True, "Σ v(ω)")


def custom_table(universe: FiniteUniverse, table: Mapping | Sequence) -> SetFunction:
    """Explicit value per subset (``n <= 16``).

    ``table`` is a sequence indexed by mask or a mapping from frozensets of
    element names to values.
    """
    universe.check_enumerable(16)
    if isinstance(table, Mapping):
        values = [None] * (1 << universe.n)
        for key, v in table.items():
            values[universe.subset(key).mask] = v
        if any(v is None for v in values):
            raise ValueError("custom table does not cover every subset")
    else:
        values = list(table)
        if len(values) != 1 << universe.n:
            raise ValueError(f"table needs {1 << universe.n} entries, got {len(values)}")
    return SetFunction(lambda A: values[A.mask], "custom_table", True, "table")


def indicator(element) -> SetFunction:
    """1 if ``element`` belongs to the set, else 0."""
    return SetFunction(lambda A: 1 if element in A else 0, f"1[{element}∈A]")


# --------------------------------------------------------------------------
# difference quotients and derivatives
# --------------------------------------------------------------------------

_ZERO_RTOL = 1e-12


def _is_zero(den, *scale) -> bool:
    if isinstance(den, (int, Fraction)):
        return den == 0
    ref = max([1.0] + [abs(float(s)) for s in scale])
    return abs(den) <= _ZERO_RTOL * ref


def difference_quotient(F: Callable, m: Callable, A, B):
    """``(F(AΔB) − F(A)) / (m(AΔB) − m(A))``.

    Raises :class:`ZeroDenominatorError` when the measure does not change.
    """
    AB = A ^ B
    mA, mAB = m(A), m(AB)
    den = mAB - mA
    if _is_zero(den, mA, mAB):
        raise ZeroDenominatorError(f"m(AΔB) == m(A) == {mA}; inadmissible variation")
    return (F(AB) - F(A)) / den


@dataclass(frozen=True)
class DerivativeReport:
    samples: tuple
    skipped: tuple
    lower: float
    upper: float
    value: float | None
    limit: object = None
    tolerance: float = 1e-8

    @property
    def exists(self) -> bool:
        return self.value is not None

    def to_json(self) -> dict:
        return {
            "samples": [None if s is None else float(s) for s in self.samples],
            "skipped": list(self.skipped),
            "lower": float(self.lower),
            "upper": float(self.upper),
            "derivative": None if self.value is None else float(self.value),
            "limit": None if self.limit is None or not hasattr(self.limit, "to_json")
            else self.limit.to_json(),
        }


def _tail_extrema(samples: Sequence, start: int):
    vals = [s for s in samples[start - 1:] if s is not None]
    if not vals:
        return None
    return min(vals), max(vals)


def derivative_along(F: Callable, m: Callable, A, seq: SetSequence,
                     tolerance: float = 1e-8, limit=None) -> DerivativeReport:
    """Quotients ``aₙ`` along ``seq`` with lim inf / lim sup estimates.

    Tail extrema over ``n >= k`` are compared for ``k = N-2W+1`` and
    ``k = N-W+1``; if they differ by more than ``tolerance`` the estimate has
    not stabilized and :class:`InconclusiveError` is raised.  Indices with a
    zero denominator are skipped and listed.
    """
    samples, skipped = [], []
    for n, B in enumerate(seq, start=1):
        try:
            samples.append(difference_quotient(F, m, A, B))
        except ZeroDenominatorError:
            samples.append(None)
            skipped.append(n)
    N, W = seq.horizon, seq.window
    early = _tail_extrema(samples, N - 2 * W + 1)
    late = _tail_extrema(samples, N - W + 1)
    if early is None or late is None:
        raise InconclusiveError("no admissible quotients in the tail window")
    if abs(early[0] - late[0]) > tolerance or abs(early[1] - late[1]) > tolerance:
        raise InconclusiveError(
            f"tail inf/sup not stable: {early} vs {late} (tolerance {tolerance})"
        )
    lower, upper = late
    value = (lower + upper) / 2 if upper - lower < tolerance else None
    if limit is None and isinstance(seq[1], Subset):
        try:
            limit = borel_limits(seq).limit
        except InconclusiveError:
            limit = None
    return DerivativeReport(tuple(samples), tuple(skipped), lower, upper, value, limit, tolerance)


def derivative_at_limit(F: SetFunction, m: Callable, A, B):
    """Closed-form derivative on any sequence converging to ``B ≠ ∅``.

    For continual ``F`` this is the quotient evaluated at the limit set.
    """
    if not getattr(F, "continual", False):
        raise NotContinualError(f"{getattr(F, 'name', F)!r} is not marked continual")
    if not B:
        raise ValueError("the limit set B must be nonempty")
    return difference_quotient(F, m, A, B)


# --------------------------------------------------------------------------
# necessary conditions for a minimum
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MinimalityReport:
    inner: tuple
    outer: tuple
    violations: tuple
    scanned: int

    @property
    def holds(self) -> bool:
        return not self.violations


def verify_minimizer(F: Callable, E: Subset, exhaustive_limit: int = 16,
                     samples: int = 100_000, rng: np.random.Generator | None = None,
                     atol: float = 1e-12) -> int:
    """Check ``F(E) <= F(A)`` over all subsets (``n <= exhaustive_limit``) or a sample.

    Returns the number of sets scanned.
    """
    u = E.universe
    fE = F(E)
    if u.n <= exhaustive_limit:
        candidates = u.subsets(exhaustive_limit)
        count = 1 << u.n
    else:
        rng = rng or np.random.default_rng(0)
        candidates = (u.random_subset(rng) for _ in range(samples))
        count = samples
    for A in candidates:
        if F(A) < fE - atol:
            raise MinimalityUnverifiedError(f"F({A!r}) = {F(A)} < F(E) = {fE}")
    return count


def check_min_necessary(F: Callable, m: Callable, E: Subset,
                        inner_seqs: Iterable[SetSequence] = (),
                        outer_seqs: Iterable[SetSequence] = (),
                        tol: float = 1e-9, rng: np.random.Generator | None = None,
                        exhaustive_limit: int = 16, samples: int = 100_000) -> MinimalityReport:
    """Sign conditions at a minimizer ``E``.

    Sequences converging to ``B ⊂ E`` must give derivative estimates ``<= 0``;
    sequences converging to ``B`` with ``B ∩ E = ∅`` must give ``>= 0``.  When
    the derivative does not exist the lim sup (inner) or lim inf (outer) is
    tested instead.
    """
    scanned = verify_minimizer(F, E, exhaustive_limit, samples, rng)
    inner, outer, violations = [], [], []
    for k, seq in enumerate(inner_seqs):
        rep = derivative_along(F, m, E, seq)
        if rep.limit is None or not rep.limit <= E:
            raise ValueError(f"inner sequence {k} does not converge to a subset of E")
        inner.append(rep)
        if rep.upper > tol:
            violations.append(f"inner sequence {k}: estimate {rep.upper} > 0")
    for k, seq in enumerate(outer_seqs):
        rep = derivative_along(F, m, E, seq)
        if rep.limit is None or not rep.limit.isdisjoint(E):
            raise ValueError(f"outer sequence {k} does not converge to a set disjoint from E")
        outer.append(rep)
        if rep.lower < -tol:
            violations.append(f"outer sequence {k}: estimate {rep.lower} < 0")
    return MinimalityReport(tuple(inner), tuple(outer), tuple(violations), scanned)


# --------------------------------------------------------------------------
# continuity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuityProbe:
    holds: bool
    delta: float | None
    witnesses: tuple
    samples: int


def continuity_probe(F: Callable, m: Callable, A: Subset, epsilon: float,
                     trials: int = 1000, rng: np.random.Generator | None = None,
                     deltas: Sequence[float] | None = None) -> ContinuityProbe:
    """Search a decreasing δ schedule for one that keeps ``|F(B) − F(A)| < ε``.

    Samples every single-element flip of ``A`` plus ``trials`` random sets.
    The default schedule halves from ``m(Ω)`` thirty times.  Returns the
    largest passing δ, or ``holds=False`` with witness pairs ``(B, ρ, ΔF)``
    found at the smallest δ tried.
    """
    rng = rng or np.random.default_rng(0)
    u = A.universe
    if deltas is None:
        top = float(m(u.full))
        deltas = [top * 2.0 ** -j for j in range(31)]
    deltas = sorted(deltas, reverse=True)
    candidates = [A ^ u.singleton(e) for e in u.elements]
    candidates += [u.random_subset(rng) for _ in range(trials)]
    fA = F(A)
    probes = [(float(m(A ^ B)), abs(F(B) - fA), B) for B in candidates]
    witnesses: list = []
    for delta in deltas:
        witnesses = [(B, rho, jump) for rho, jump, B in probes if rho < delta and not jump < epsilon]
        if not witnesses:
            return ContinuityProbe(True, delta, (), len(probes))
    return ContinuityProbe(False, None, tuple(witnesses), len(probes))


def continuity_residuals(F: Callable, seq: SetSequence, B) -> tuple:
    """``|F(Bₙ) − F(B)|`` along a sequence converging to ``B``."""
    fB = F(B)
    return tuple(abs(F(b) - fB) for b in seq)


def measure_gap_pairs(m: Callable, seq: SetSequence, B) -> tuple:
    """Pairs ``(|m(Bₙ) − m(B)|, m(Bₙ Δ B))``; the first never exceeds the second."""
    mB = m(B)
    return tuple((abs(m(b) - mB), m(b ^ B)) for b in seq)


# --------------------------------------------------------------------------
# differentiation rules
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RuleCheck:
    rule: str
    lhs: float
    rhs: float
    agree: bool
    theta: float | None = None


def _close(x, y, rtol: float) -> bool:
    if isinstance(x, (int, Fraction)) and isinstance(y, (int, Fraction)):
        return x == y
    return abs(x - y) <= rtol * max(1.0, abs(x), abs(y))


def find_theta(g: Callable[[float], float], grid: int = 10_000, tol: float = 1e-6,
               prefer: float = 0.5) -> tuple[float, float]:
    """Root of ``g`` on [0, 1]: grid scan, then bisection on each sign change.

    Returns ``(theta, |g(theta)|)`` for the best candidate; ``prefer`` wins
    whenever it already satisfies ``tol``.
    """
    gp = abs(g(prefer))
    if gp < tol:
        return prefer, gp
    thetas = np.linspace(0.0, 1.0, grid + 1)
    vals = np.array([g(float(t)) for t in thetas])
    best_i = int(np.argmin(np.abs(vals)))
    best = (float(thetas[best_i]), float(abs(vals[best_i])))
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        lo, hi = float(thetas[i]), float(thetas[i + 1])
        glo = vals[i]
        for _ in range(60):
            mid = (lo + hi) / 2
            gm = g(mid)
            if gm == 0:
                lo = hi = mid
                break
            if (gm < 0) == (glo < 0):
                lo, glo = mid, gm
            else:
                hi = mid
        t = (lo + hi) / 2
        gt = abs(g(t))
        if gt < best[1]:
            best = (t, gt)
    return best


def numeric_derivative(phi: Callable[[float], float], h: float = 1e-6) -> Callable[[float], float]:
    return lambda t: (phi(t + h) - phi(t - h)) / (2 * h)


def rule_check(rule: str, F1: Callable, F2: Callable | None = None, *, m: Callable, A, B,
               c: Real | None = None, phi: Callable | None = None,
               dphi: Callable | None = None, rtol: float = 1e-10,
               grid: int = 10_000, theta_tol: float = 1e-6) -> RuleCheck:
    """Evaluate both sides of a differentiation rule for the variation ``A → AΔB``.

    r1: constant ``F1``; r2: ``c·F1``; r3: ``F1 + F2``; r4: ``F1·F2``;
    r5: ``F1/F2``; r6: ``phi(F1)`` with a mean-value θ search.
    """
    q = lambda G: difference_quotient(G, m, A, B)  # noqa: E731
    AB = A ^ B
    if rule == "r1":
        lhs, rhs = q(F1), 0
    elif rule == "r2":
        if c is None:
            raise ValueError("r2 needs the constant c")
        lhs, rhs = q(lambda S: c * F1(S)), c * q(F1)
    elif rule == "r3":
        lhs, rhs = q(lambda S: F1(S) + F2(S)), q(F1) + q(F2)
    elif rule == "r4":
        lhs = q(lambda S: F1(S) * F2(S))
        rhs = (F2(AB) + F2(A)) / 2 * q(F1) + (F1(AB) + F1(A)) / 2 * q(F2)
    elif rule == "r5":
        f2a, f2ab = F2(A), F2(AB)
        if f2a == 0 or f2ab == 0:
            raise ZeroDenominatorError("r5 needs F2(A) != 0 and F2(AΔB) != 0")
        lhs = q(lambda S: F1(S) / F2(S))
        rhs = (f2a * q(F1) - F1(A) * q(F2)) / (f2ab * f2a)
    elif rule == "r6":
        if phi is None:
            raise ValueError("r6 needs phi")
        dphi = dphi or numeric_derivative(phi)
        lhs = q(lambda S: phi(F1(S)))
        qF = q(F1)
        fa, fab = F1(A), F1(AB)
        theta, err = find_theta(
            lambda t: dphi(fa + t * (fab - fa)) * qF - lhs, grid, theta_tol)
        if err >= theta_tol:
            raise NoWitnessError(f"no θ within {theta_tol}: best residual {err} at θ={theta}")
        rhs = dphi(fa + theta * (fab - fa)) * qF
        return RuleCheck(rule, lhs, rhs, True, theta)
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return RuleCheck(rule, lhs, rhs, _close(lhs, rhs, rtol))
