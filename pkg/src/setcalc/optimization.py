"""n-ary set functions, partial derivatives and two grid optimization tasks.

Planar and 1-D regions are discretized into grid cells; a cell subset is a
:class:`~setcalc.finite_core.Subset` of a universe whose weights are the
cell areas, so every set-function tool applies unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .calculus import DerivativeReport, derivative_along, difference_quotient
from .convergence import SetSequence
from .errors import InconclusiveError, MinimalityUnverifiedError
from .expr import parse
from .finite_core import FiniteUniverse, Subset, measure_finite

# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridDomain:
    """Regular grid of cells with centers ``centers`` (shape ``(N, d)``) and equal area."""

    name: str
    h: float
    centers: np.ndarray
    area: float

    @classmethod
    def quarter_disk(cls, h: float = 0.01) -> GridDomain:
        """Cells of side ``h`` in x₁, x₂ ≥ 0 whose center satisfies x₁² + x₂² ≤ 1."""
        k = int(round(1 / h))
        c = (np.arange(k) + 0.5) * h
        x1, x2 = np.meshgrid(c, c, indexing="ij")
        inside = x1**2 + x2**2 <= 1.0
        centers = np.column_stack([x1[inside], x2[inside]])
        return cls(f"quarter_disk(h={h})", h, centers, h * h)

    @classmethod
    def unit_interval(cls, h: float = 0.01) -> GridDomain:
        k = int(round(1 / h))
        return cls(f"unit_interval(h={h})", h, ((np.arange(k) + 0.5) * h)[:, None], h)

    @classmethod
    def from_points(cls, points: Sequence[float], area: float = 1.0) -> GridDomain:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        return cls("points", area, pts, area)

    def __len__(self) -> int:
        return len(self.centers)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def coords(self) -> tuple:
        return tuple(self.centers[:, j] for j in range(self.dim))

    @cached_property
    def universe(self) -> FiniteUniverse:
        return FiniteUniverse(tuple(f"c{i}" for i in range(len(self))), (self.area,) * len(self))

    def subset(self, mask) -> Subset:
        return self.universe.from_array(np.asarray(mask, dtype=bool))

    def evaluate(self, f) -> np.ndarray:
        """Values of ``f`` at the cell centers; ``f`` may be an expression in x / x1, x2."""
        if isinstance(f, str):
            names = ["x"] if self.dim == 1 else [f"x{j + 1}" for j in range(self.dim)]
            expr = parse(f, names)
            f = lambda *xs: expr(*xs)  # noqa: E731
        if callable(f):
            vals = f(*self.coords())
        else:
            vals = f
        return np.broadcast_to(np.asarray(vals, dtype=float), (len(self),)).copy()


# --------------------------------------------------------------------------
# n-ary set functions
# --------------------------------------------------------------------------


def _replace(args: tuple, i: int, S) -> tuple:
    return args[:i] + (S,) + args[i + 1:]


@dataclass(frozen=True)
class NArySetFunction:
    """``F(A₁, ..., Aₙ)`` with one measure per slot.

    ``completion(args, i, S)`` turns a variation of slot ``i`` into the
    argument tuple actually evaluated; the default freezes the other slots.
    """

    arity: int
    evaluator: Callable[..., float]
    measures: tuple = ()
    name: str = "F"
    completion: Callable | None = None

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        measures = tuple(self.measures) or (measure_finite,) * self.arity
        if len(measures) != self.arity:
            raise ValueError(f"{len(measures)} measures for arity {self.arity}")
        object.__setattr__(self, "measures", measures)

    def __call__(self, *args) -> float:
        if len(args) != self.arity:
            raise ValueError(f"{self.name} takes {self.arity} sets, got {len(args)}")
        return self.evaluator(*args)

    def slot(self, args: Sequence, i: int) -> Callable:
        """``S ↦ F`` with slot ``i`` varied and the rest completed."""
        args = tuple(args)
        complete = self.completion or (lambda a, j, S: _replace(a, j, S))
        return lambda S: self.evaluator(*complete(args, i, S))


def partial_derivative(F: NArySetFunction, i: int, args: Sequence, seq: SetSequence,
                       tolerance: float = 1e-8) -> DerivativeReport:
    """∂F/∂mᵢ along ``seq`` with the other slots frozen (or completed)."""
    return derivative_along(F.slot(args, i), F.measures[i], tuple(args)[i], seq, tolerance)


@dataclass(frozen=True)
class Gradient:
    components: tuple
    reports: tuple
    undefined: tuple

    def to_json(self) -> dict:
        return {"components": list(self.components), "undefined": list(self.undefined)}


def gradient(F: NArySetFunction, args: Sequence, seqs: Sequence[SetSequence],
             tolerance: float = 1e-8) -> Gradient:
    """Vector of partial derivatives; components that fail to settle are ``None``."""
    if len(seqs) != F.arity:
        raise ValueError("one sequence per slot is required")
    comps, reports, undefined = [], [], []
    for i, seq in enumerate(seqs):
        try:
            rep = partial_derivative(F, i, args, seq, tolerance)
        except InconclusiveError:
            rep = None
        reports.append(rep)
        value = None if rep is None else rep.value
        comps.append(value)
        if value is None:
            undefined.append(i)
    return Gradient(tuple(comps), tuple(reports), tuple(undefined))


@dataclass(frozen=True)
class Theorem6Report:
    inner: tuple
    outer: tuple
    tolerance: float
    verified: bool

    @property
    def positive_inner(self) -> list:
        return [(i, v) for i, v in self.inner if v > self.tolerance]

    @property
    def negative_outer(self) -> list:
        return [(i, v) for i, v in self.outer if v < -self.tolerance]

    @property
    def holds(self) -> bool:
        return not self.positive_inner and not self.negative_outer


def check_theorem6(F: NArySetFunction, args: Sequence, inner_seqs: Sequence,
                   outer_seqs: Sequence = (), tolerance: float = 1e-9,
                   competitors=None, require_minimizer: bool = True) -> Theorem6Report:
    """Inner-gradient sign check at a (sampled) minimizer.

    ``inner_seqs`` / ``outer_seqs`` are ``(slot, SetSequence)`` pairs; inner
    sequences must lie inside the slot's set, outer ones outside it.  Each
    component is the upper (inner) or lower (outer) tail estimate of the
    partial derivative.  With ``require_minimizer`` the argument must beat
    every tuple in ``competitors``.
    """
    args = tuple(args)
    verified = False
    if competitors is not None:
        base = F(*args)
        scale = 1e-12 * max(1.0, abs(base))
        for other in competitors:
            if F(*other) < base - scale:
                if require_minimizer:
                    raise MinimalityUnverifiedError(f"a competitor improves {F.name}: {F(*other)} < {base}")
                break
        else:
            verified = True
    if require_minimizer and not verified:
        raise MinimalityUnverifiedError("no competitors supplied to verify the minimizer")
    inner, outer = [], []
    for kind, pairs, out in (("inner", inner_seqs, inner), ("outer", outer_seqs, outer)):
        for i, seq in pairs:
            for B in seq:
                ok = B <= args[i] if kind == "inner" else B.isdisjoint(args[i])
                if not ok:
                    raise ValueError(f"{kind} sequence for slot {i} leaves the admissible region")
            rep = partial_derivative(F, i, args, seq)
            out.append((i, float(rep.upper if kind == "inner" else rep.lower)))
    return Theorem6Report(tuple(inner), tuple(outer), tolerance, verified)


# --------------------------------------------------------------------------
# partition task: minimize Σᵢ ∫_{Ωᵢ} fᵢ dm over partitions of Ω
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PartitionObjective:
    """Cell costs ``values[i, c] = fᵢ(c)·area(c)`` for ``k`` slots."""

    values: np.ndarray
    universe: FiniteUniverse
    f_values: np.ndarray = field(repr=False, default=None)

    @classmethod
    def on_grid(cls, fs: Sequence, grid: GridDomain) -> PartitionObjective:
        fv = np.array([grid.evaluate(f) for f in fs])
        return cls(fv * grid.area, grid.universe, fv)

    @classmethod
    def from_tables(cls, tables: Sequence[Sequence[float]], areas: Sequence[float] | None = None):
        fv = np.asarray(tables, dtype=float)
        n = fv.shape[1]
        areas = np.ones(n) if areas is None else np.asarray(areas, dtype=float)
        u = FiniteUniverse(tuple(f"c{i}" for i in range(n)), tuple(float(a) for a in areas))
        return cls(fv * areas, u, fv)

    def __post_init__(self):
        if self.f_values is None:
            w = np.asarray(self.universe.weights, dtype=float)
            object.__setattr__(self, "f_values", self.values / w)

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def cost(self, labels) -> float:
        labels = np.asarray(labels)
        return math.fsum(self.values[labels, np.arange(self.n)])

    def labels_of(self, parts: Sequence[Subset]) -> np.ndarray:
        labels = np.full(self.n, -1)
        for i, P in enumerate(parts):
            idx = P.to_array()
            if (labels[idx] != -1).any():
                raise ValueError("parts overlap")
            labels[idx] = i
        if (labels == -1).any():
            raise ValueError("parts do not cover the grid")
        return labels

    def parts_of(self, labels) -> tuple:
        labels = np.asarray(labels)
        return tuple(self.universe.from_array(labels == i) for i in range(self.k))

    def evaluate(self, *parts: Subset) -> float:
        # an un-partitioned tuple is still well defined: each part pays its own cost
        return math.fsum(math.fsum(self.values[i][P.to_array()]) for i, P in enumerate(parts))

    def _complete(self, args: tuple, i: int, S: Subset) -> tuple:
        """Admissible variation: cells leaving slot ``i`` go to their cheapest
        other slot, cells joining slot ``i`` leave their owner."""
        removed = (args[i] - S).to_array()
        added = S.to_array()
        others = [j for j in range(self.k) if j != i]
        masks = [P.to_array().copy() for P in args]
        for j in others:
            masks[j] &= ~added
        if removed.any():
            receiver = np.array(others)[np.argmin(self.f_values[others][:, removed], axis=0)]
            idx = np.nonzero(removed)[0]
            for j in others:
                masks[j][idx[receiver == j]] = True
        masks[i] = added
        return tuple(self.universe.from_array(mk) for mk in masks)

    def as_nary(self) -> NArySetFunction:
        return NArySetFunction(self.k, self.evaluate, (measure_finite,) * self.k,
                               "partition_objective", self._complete)

    def random_labels(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.integers(0, self.k, size=(count, self.n))

    def random_costs(self, rng: np.random.Generator, count: int, batch: int = 500) -> np.ndarray:
        """Objective of ``count`` uniformly random partitions."""
        out = []
        cols = np.arange(self.n)
        for start in range(0, count, batch):
            labels = self.random_labels(rng, min(batch, count - start))
            out.append(self.values[labels, cols].sum(axis=1))
        return np.concatenate(out) if out else np.array([])


@dataclass(frozen=True)
class PartitionResult:
    labels: np.ndarray
    parts: tuple
    objective: float

    def to_json(self) -> dict:
        return {
            "assignment": [int(x) + 1 for x in self.labels],
            "sizes": [len(P) for P in self.parts],
            "objective": self.objective,
        }


def partition_labels(f_values: np.ndarray) -> np.ndarray:
    """Slot index per cell by the pointwise rule with ties to the lowest index.

    For three slots: Ω₁ takes f₁ ≤ f₂ and f₁ ≤ f₃; Ω₂ takes f₂ < f₁ and
    f₂ ≤ f₃; Ω₃ takes the rest.
    """
    f = np.asarray(f_values, dtype=float)
    labels = np.full(f.shape[1], -1)
    for i in range(f.shape[0]):
        take = labels == -1
        for j in range(f.shape[0]):
            if j < i:
                take &= f[i] < f[j]
            elif j > i:
                take &= f[i] <= f[j]
        labels[take] = i
    return labels


def partition_argmin(objective: PartitionObjective) -> PartitionResult:
    labels = partition_labels(objective.f_values)
    return PartitionResult(labels, objective.parts_of(labels), objective.cost(labels))


def inner_outer_sequences(objective: PartitionObjective, parts: Sequence[Subset],
                          cells_per_slot: int = 5, rng: np.random.Generator | None = None,
                          horizon: int = 8) -> tuple[list, list]:
    """Constant single-cell sequences inside (inner) and outside (outer) each part."""
    rng = rng or np.random.default_rng(0)
    inner, outer = [], []
    u = objective.universe
    for i, P in enumerate(parts):
        mask = P.to_array()
        for kind, pool in (("inner", np.nonzero(mask)[0]), ("outer", np.nonzero(~mask)[0])):
            if len(pool) == 0:
                continue
            chosen = rng.choice(pool, size=min(cells_per_slot, len(pool)), replace=False)
            for c in sorted(chosen.tolist()):
                B = u.from_indices([c])
                seq = SetSequence(lambda n, B=B: B, horizon, name=f"{{c{c}}}")
                (inner if kind == "inner" else outer).append((i, seq))
    return inner, outer


# --------------------------------------------------------------------------
# bi-objective Pareto family on the quarter disk
# --------------------------------------------------------------------------


def boundary_slope(lam: float, a: float, b: float) -> float:
    """Slope of the ray on which x₁ + x₂ = λ(a x₁ − b x₂)."""
    return (lam * a - 1) / (lam * b + 1)


@dataclass(frozen=True, eq=False)
class ParetoFamily:
    a: float
    b: float
    h: float
    lambdas: tuple
    slopes: tuple
    grid: GridDomain
    sets: tuple
    F1: tuple
    F2: tuple
    note: str = "A(λ) is read as the grid sector 0 <= x2 <= s(λ)·x1"

    def rows(self) -> list:
        return list(zip(self.lambdas, self.F1, self.F2))

    def with_set(self, k: int, S: Subset) -> ParetoFamily:
        """Copy with member ``k`` replaced (used for mutation checks)."""
        sets = list(self.sets)
        sets[k] = S
        f1, f2 = pareto_objectives(self.grid, self.a, self.b)
        F1 = list(self.F1)
        F2 = list(self.F2)
        F1[k], F2[k] = f1(S), f2(S)
        return ParetoFamily(self.a, self.b, self.h, self.lambdas, self.slopes, self.grid,
                            tuple(sets), tuple(F1), tuple(F2), self.note)


def pareto_objectives(grid: GridDomain, a: float, b: float) -> tuple[Callable, Callable]:
    """``F₁(A) = Σ_A f₁·area`` and ``F₂(A) = Σ_{Ω∖A} f₂·area``."""
    x1, x2 = grid.coords()
    w1 = (x1 + x2) * grid.area
    w2 = (a * x1 - b * x2) * grid.area

    def F1(A: Subset) -> float:
        return math.fsum(w1[A.to_array()])

    def F2(A: Subset) -> float:
        return math.fsum(w2[~A.to_array()])

    return F1, F2


def pareto_family(a: float, b: float, lambdas: Sequence[float], h: float = 0.01,
                  grid: GridDomain | None = None) -> ParetoFamily:
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    lambdas = tuple(float(x) for x in lambdas)
    if not lambdas:
        raise ValueError("the λ list is empty")
    bad = [lam for lam in lambdas if lam * a - 1 < 0]
    if bad:
        raise ValueError(f"λ must satisfy λa − 1 >= 0; rejected {bad}")
    grid = grid or GridDomain.quarter_disk(h)
    x1, x2 = grid.coords()
    F1, F2 = pareto_objectives(grid, a, b)
    slopes, sets = [], []
    for lam in lambdas:
        s = boundary_slope(lam, a, b)
        slopes.append(s)
        sets.append(grid.subset((x2 >= 0) & (x2 <= s * x1)))
    return ParetoFamily(a, b, h, lambdas, tuple(slopes), grid, tuple(sets),
                        tuple(F1(S) for S in sets), tuple(F2(S) for S in sets))


@dataclass(frozen=True)
class ParetoReport:
    monotone_violations: tuple
    dominated_pairs: tuple
    tolerance: float

    @property
    def ok(self) -> bool:
        return not self.monotone_violations and not self.dominated_pairs


def pareto_verify(family: ParetoFamily, tolerance: float | None = None) -> ParetoReport:
    """F₁ nondecreasing and F₂ nonincreasing in λ; no member dominates another.

    ``A`` dominates ``B`` when it is no worse in both objectives and better
    by more than ``tolerance`` (default ``2h``) in at least one.  Steps
    along λ may move the wrong way by up to ``tolerance``.
    """
    if not family.lambdas:
        raise ValueError("empty family")
    tol = 2 * family.h if tolerance is None else tolerance
    order = np.argsort(family.lambdas, kind="stable")
    F1 = [family.F1[k] for k in order]
    F2 = [family.F2[k] for k in order]
    mono = []
    for s in range(len(order) - 1):
        if F1[s + 1] < F1[s] - tol or F2[s + 1] > F2[s] + tol:
            mono.append((int(order[s]), int(order[s + 1])))
    dom = []
    for p in range(len(order)):
        for q in range(len(order)):
            if p == q:
                continue
            no_worse = F1[p] <= F1[q] and F2[p] <= F2[q]
            better = F1[p] < F1[q] - tol or F2[p] < F2[q] - tol
            if no_worse and better:
                dom.append((int(order[p]), int(order[q])))
    return ParetoReport(tuple(mono), tuple(dom), tol)


@dataclass(frozen=True)
class StationarityReport:
    lam: float
    cells: tuple
    residuals: tuple
    lagrange_residuals: tuple
    tolerance: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def holds(self) -> bool:
        worst = max(self.residuals + self.lagrange_residuals, default=0.0)
        return worst <= self.tolerance


def stationarity_check(family: ParetoFamily, k: int, samples: int = 50,
                       tolerance: float | None = None) -> StationarityReport:
    """``f₁ = λf₂`` at boundary cells of ``A(λ_k)``.

    Boundary cells are cells of ``A(λ)`` whose center lies within ``h`` of
    the ray.  The residual ``|f₁ − λf₂| / ‖∇(f₁ − λf₂)‖`` is the distance
    from the cell center to the zero line, so it is comparable with ``h``.
    The same relation is also recovered from single-cell difference
    quotients of F₁ and F₂.
    """
    lam, s = family.lambdas[k], family.slopes[k]
    a, b = family.a, family.b
    tol = 2 * family.h if tolerance is None else tolerance
    grid = family.grid
    x1, x2 = grid.coords()
    A = family.sets[k]
    dist = np.abs(s * x1 - x2) / math.hypot(1.0, s)
    cand = np.nonzero(A.to_array() & (dist <= family.h))[0]
    if len(cand) > samples:
        cand = cand[np.linspace(0, len(cand) - 1, samples).round().astype(int)]
    norm = math.hypot(1 - lam * a, 1 + lam * b)
    F1, F2 = pareto_objectives(grid, a, b)
    res, lres = [], []
    for c in cand.tolist():
        f1 = x1[c] + x2[c]
        f2 = a * x1[c] - b * x2[c]
        res.append(abs(f1 - lam * f2) / norm)
        B = grid.universe.from_indices([c])
        d1 = difference_quotient(F1, measure_finite, A, B)
        d2 = difference_quotient(F2, measure_finite, A, B)
        # dF₁/dm = −λ dF₂/dm, normalized as above
        lres.append(abs(d1 + lam * d2) / norm)
    return StationarityReport(lam, tuple(cand.tolist()), tuple(res), tuple(lres), tol)
