"""Limits of set sequences over a finite inspection horizon.

Lower and upper limits are estimated from tail intersections and
unions.  The tail starting at index ``k`` is ``B_k, ..., B_N``; the
estimate is accepted only when it is the same for every start ``k`` in the
stabilization window ``N-2W+1 .. N-W+1`` (every such tail still spans at
least ``W`` terms).  Otherwise the horizon is reported as too short.
"""

from __future__ import annotations

import enum
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import InconclusiveError
from .finite_core import Subset, measure_finite


class SetSequence:
    """Indexed family ``n -> B_n`` for ``n = 1..horizon``.

    The generator must be pure; terms are cached on first access.
    """

    def __init__(self, generator: Callable[[int], object], horizon: int,
                 window: int | None = None, name: str = "B"):
        if horizon < 2:
            raise ValueError("horizon must be at least 2")
        window = horizon // 4 if window is None else window
        if window < 1 or 2 * window > horizon:
            raise ValueError(f"window {window} must satisfy 1 <= W <= horizon/2 ({horizon})")
        self.generator = generator
        self.horizon = horizon
        self.window = window
        self.name = name
        self._terms: list | None = None

    def __getitem__(self, n: int):
        if not 1 <= n <= self.horizon:
            raise IndexError(f"index {n} outside 1..{self.horizon}")
        return self.terms()[n - 1]

    def terms(self) -> list:
        if self._terms is None:
            self._terms = [self.generator(n) for n in range(1, self.horizon + 1)]
        return self._terms

    def __iter__(self):
        return iter(self.terms())

    def __len__(self) -> int:
        return self.horizon

    def map(self, fn: Callable, name: str | None = None) -> SetSequence:
        """Sequence ``n -> fn(B_n)`` with the same horizon and window."""
        return SetSequence(lambda n: fn(self[n]), self.horizon, self.window,
                           name or f"f({self.name})")

    def subsequence(self, stride: int, offset: int = 0) -> SetSequence:
        """``n -> B_{offset + n*stride}``."""
        if stride < 1 or offset < 0:
            raise ValueError("stride must be >= 1 and offset >= 0")
        horizon = (self.horizon - offset) // stride
        window = max(1, min(horizon // 2, self.window // stride or 1))
        return SetSequence(lambda n: self[offset + n * stride], horizon, window,
                           f"{self.name}[{offset}+{stride}n]")

    def __repr__(self) -> str:
        return f"SetSequence({self.name}, horizon={self.horizon}, window={self.window})"


# --------------------------------------------------------------------------
# sequence builders
# --------------------------------------------------------------------------


def constant(B, horizon: int = 64, window: int | None = None) -> SetSequence:
    return SetSequence(lambda n: B, horizon, window, "constant")


def alternating(A, B, horizon: int = 64, window: int | None = None) -> SetSequence:
    """``A`` at even indices, ``B`` at odd ones."""
    return SetSequence(lambda n: A if n % 2 == 0 else B, horizon, window, "alternating")


def eventually_constant(prefix: Sequence, tail, switch: int, horizon: int = 64,
                        window: int | None = None) -> SetSequence:
    """Cycle through ``prefix`` for ``n <= switch``, then ``tail`` forever."""
    prefix = list(prefix)
    if not prefix:
        raise ValueError("prefix must be nonempty")
    return SetSequence(
        lambda n: prefix[(n - 1) % len(prefix)] if n <= switch else tail,
        horizon, window, "eventually_constant",
    )


def shrinking_tail(B: Subset, extra: Subset, step: int = 1, horizon: int = 64,
                   window: int | None = None) -> SetSequence:
    """``B`` plus the elements of ``extra``, dropped one at a time every ``step`` indices.

    Reaches ``B ∪ (extra ∩ B)`` after ``len(extra) * step`` terms.
    """
    if step < 1:
        raise ValueError("step must be >= 1")
    order = extra.indices()
    u = B.universe

    def term(n: int) -> Subset:
        dropped = min(len(order), (n - 1) // step)
        return B | u.from_indices(order[dropped:])

    return SetSequence(term, horizon, window, "shrinking_tail")


# --------------------------------------------------------------------------
# Borel lower/upper limits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BorelLimits:
    lower: Subset
    upper: Subset

    @property
    def exists(self) -> bool:
        return self.lower == self.upper

    @property
    def limit(self) -> Subset | None:
        return self.lower if self.exists else None


def _tail_masks(seq: SetSequence):
    """Tail intersections and unions for start indices in the stabilization window."""
    terms = seq.terms()
    N, W = seq.horizon, seq.window
    universe = terms[0].universe
    full = (1 << universe.n) - 1
    inter, union = full, 0
    tails = {}
    first = N - 2 * W + 1
    for k in range(N, first - 1, -1):
        mask = terms[k - 1].mask
        inter &= mask
        union |= mask
        if k <= N - W + 1:
            tails[k] = (inter, union)
    return tails, first, N - W + 1, universe


def borel_limits(seq: SetSequence) -> BorelLimits:
    """Lower limit ⋃ₖ⋂_{n≥k} Bₙ and upper limit ⋂ₖ⋃_{n≥k} Bₙ, truncated at the horizon.

    Raises :class:`InconclusiveError` when the tail intersections or unions
    still change across the stabilization window.
    """
    tails, first, last, universe = _tail_masks(seq)
    (i_first, u_first), (i_last, u_last) = tails[first], tails[last]
    if i_first != i_last or u_first != u_last:
        raise InconclusiveError(
            f"tail intersections/unions of {seq!r} not stable over starts {first}..{last}"
        )
    lower, upper = Subset(universe, i_last), Subset(universe, u_last)
    assert lower <= upper
    return BorelLimits(lower, upper)


# --------------------------------------------------------------------------
# metric limits
# --------------------------------------------------------------------------


class Verdict(str, enum.Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class MetricLimit:
    verdict: Verdict
    candidate: object
    epsilon: float
    n_eps: int | None
    residuals: tuple

    @property
    def converged(self) -> bool:
        return self.verdict is Verdict.CONVERGED


def metric_limit(seq: SetSequence, candidate, epsilon: float,
                 measure: Callable = measure_finite) -> MetricLimit:
    """Check ``m(Bₙ Δ candidate) < ε`` for all inspected ``n > n(ε)``.

    ``n(ε)`` is the last index whose residual is not below ``ε`` (at least 1).
    The verdict is *converged* when ``n(ε) <= N - W``.  Otherwise it is
    *inconclusive* if the final ``ceil(W/2)`` residuals are all below ``ε``
    (the sequence may just be settling) and *diverged* if not.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    residuals = tuple(measure(b ^ candidate) for b in seq)
    N, W = seq.horizon, seq.window
    last_bad = 0
    for n, r in enumerate(residuals, start=1):
        if not r < epsilon:
            last_bad = n
    n_eps = max(1, last_bad)
    if n_eps <= N - W:
        verdict = Verdict.CONVERGED
    elif last_bad <= N - (W + 1) // 2:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.DIVERGED
    return MetricLimit(verdict, candidate, epsilon,
                       n_eps if verdict is Verdict.CONVERGED else None, residuals)


def separation_epsilon(universe) -> float:
    """Half the smallest weight: below it, ``m(X) < ε`` forces ``X = ∅``."""
    return min(universe.weights) / 2


@dataclass(frozen=True)
class LimitReport:
    lower: Subset
    upper: Subset
    verdict: Verdict
    limit: Subset | None
    residuals: tuple

    def to_json(self) -> dict:
        return {
            "lower": self.lower.to_json(),
            "upper": self.upper.to_json(),
            "verdict": self.verdict.value,
            "limit": None if self.limit is None else self.limit.to_json(),
            "tail_residuals": [float(r) for r in self.residuals],
        }


def limit_report(seq: SetSequence, epsilon: float | None = None,
                 measure: Callable = measure_finite) -> LimitReport:
    """Borel limits plus the metric verdict against the Borel candidate (or ``B_N``)."""
    borel = borel_limits(seq)
    universe = seq[1].universe
    eps = separation_epsilon(universe) if epsilon is None else epsilon
    candidate = borel.limit if borel.exists else seq[seq.horizon]
    ml = metric_limit(seq, candidate, eps, measure)
    tail = ml.residuals[seq.horizon - seq.window:]
    return LimitReport(borel.lower, borel.upper, ml.verdict,
                       candidate if ml.converged else None, tail)


# --------------------------------------------------------------------------
# the Borel limit exists iff the metric limit exists, and they agree
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Theorem1Report:
    borel_exists: bool
    metric_exists: bool
    borel_limit: Subset | None
    metric_limit: Subset | None
    violations: tuple

    @property
    def agree(self) -> bool:
        return not self.violations


def check_theorem1(seq: SetSequence, epsilon: float | None = None,
                   measure: Callable = measure_finite) -> Theorem1Report:
    """Compare existence and value of the Borel and metric limits.

    With ``ε`` below the smallest weight, metric convergence forces
    ``Bₙ = B`` for all large ``n``, so the only possible metric limit is the
    last inspected term.
    """
    borel = borel_limits(seq)
    universe = seq[1].universe
    eps = separation_epsilon(universe) if epsilon is None else epsilon
    violations = []
    if not borel.lower <= borel.upper:
        violations.append("lower limit not contained in upper limit")
    last = seq[seq.horizon]
    ml = metric_limit(seq, last, eps, measure)
    if ml.verdict is Verdict.INCONCLUSIVE:
        raise InconclusiveError(f"metric limit of {seq!r} not settled within the horizon")
    metric = last if ml.converged else None
    if borel.exists:
        at_borel = metric_limit(seq, borel.limit, eps, measure)
        if not at_borel.converged:
            violations.append("Borel limit exists but the sequence does not converge to it in ρ")
    if borel.exists != ml.converged:
        violations.append(
            f"existence disagrees: Borel={borel.exists}, metric={ml.converged}"
        )
    if borel.exists and ml.converged and borel.limit != metric:
        violations.append("Borel and metric limits differ")
    return Theorem1Report(borel.exists, ml.converged, borel.limit, metric, tuple(violations))


# --------------------------------------------------------------------------
# limits commute with ∪, ∩, ∖, Δ
# --------------------------------------------------------------------------

OPERATIONS = {
    "union": operator.or_,
    "intersection": operator.and_,
    "difference": operator.sub,
    "symmetric_difference": operator.xor,
    "∪": operator.or_,
    "∩": operator.and_,
    "∖": operator.sub,
    "Δ": operator.xor,
}


@dataclass(frozen=True)
class OpLimitReport:
    op: str
    limit: object
    target: object
    converged: bool
    tail_residual: float
    contraction_holds: bool


def limit_op_commutes(seq: SetSequence, A, op: str, limit=None,
                      epsilon: float | None = None,
                      measure: Callable = measure_finite) -> OpLimitReport:
    """Check that ``{Bₙ * A}`` converges to ``B * A``.

    Also checks ``m((Bₙ*A) Δ (B*A)) <= m(Bₙ Δ B)`` at every inspected index,
    the inclusion ``(Bₙ*A) Δ (B*A) ⊆ Bₙ Δ B`` that drives the argument.
    """
    try:
        fn = OPERATIONS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    if limit is None:
        limit = borel_limits(seq).limit
        if limit is None:
            raise ValueError("the sequence has no limit")
    if epsilon is None:
        epsilon = separation_epsilon(A.universe) if isinstance(A, Subset) else 1e-9
    if not metric_limit(seq, limit, epsilon, measure).converged:
        raise ValueError("the sequence does not converge to the given limit")
    target = fn(limit, A)
    mapped = seq.map(lambda b: fn(b, A))
    ml = metric_limit(mapped, target, epsilon, measure)
    if ml.verdict is Verdict.INCONCLUSIVE:
        raise InconclusiveError("transformed sequence not settled within the horizon")
    contraction = all(
        measure(fn(b, A) ^ target) <= measure(b ^ limit) for b in seq
    )
    tail = max(float(r) for r in ml.residuals[seq.horizon - seq.window:])
    return OpLimitReport(op, limit, target, ml.converged, tail, contraction)


# --------------------------------------------------------------------------
# hybrid sequences: Borel limits sampled at probe points
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeLimits:
    probes: tuple
    lower: np.ndarray
    upper: np.ndarray
    fractals: tuple

    @property
    def exists(self) -> bool:
        return bool(np.array_equal(self.lower, self.upper))


def hybrid_membership(S, x) -> bool:
    """Membership of ``x`` in the interval or point part of a hybrid set."""
    return x in S.K or x in S.Q


def borel_limits_probe(seq: SetSequence, grid: int = 64) -> ProbeLimits:
    """Lower/upper limits of a hybrid-set sequence evaluated at rational probes.

    Probes are ``i/grid`` for ``i = 0..grid`` plus every isolated point that
    occurs in the sequence.  Fractal parts must be constant over the
    stabilization window.
    """
    terms = seq.terms()
    N, W = seq.horizon, seq.window
    probes = {Fraction(i, grid) for i in range(grid + 1)}
    for t in terms:
        probes.update(t.Q)
    probes = tuple(sorted(probes))
    member = np.array([[hybrid_membership(t, x) for x in probes] for t in terms], dtype=bool)
    first, last = N - 2 * W + 1, N - W + 1
    lo = [member[k - 1:].all(axis=0) for k in (first, last)]
    hi = [member[k - 1:].any(axis=0) for k in (first, last)]
    if not (np.array_equal(*lo) and np.array_equal(*hi)):
        raise InconclusiveError("probe memberships not stable over the window")
    fr = {t.fractals for t in terms[first - 1:]}
    if len(fr) != 1:
        raise InconclusiveError("fractal parts are not eventually constant")
    return ProbeLimits(probes, lo[1], hi[1], fr.pop())
