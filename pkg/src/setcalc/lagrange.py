"""The curve γ = {(m(A), F(A))} and a mean-value formula for set functions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .calculus import derivative_along, find_theta
from .convergence import SetSequence
from .errors import MultivaluedCurveError, NoWitnessError, ZeroDenominatorError
from .finite_core import FiniteUniverse, Subset, measure_finite

ENUMERATION_LIMIT = 16


@dataclass(frozen=True, eq=False)
class GammaCurve:
    """Sampled points of γ with x grouped into buckets of equal measure.

    ``bucket_x[j]`` is a measure value and ``bucket_y[j]`` the distinct
    ``F`` values seen there (more than one means γ is multivalued at that x).
    """

    x: np.ndarray
    y: np.ndarray
    bucket_x: np.ndarray
    bucket_y: tuple
    witness: tuple | None
    F: Callable
    m: Callable
    interpolation: str = "pchip"
    y_tol: float = 1e-9

    @property
    def single_valued(self) -> bool:
        return self.witness is None

    def multivalued_between(self, lo: float, hi: float) -> bool:
        lo, hi = min(lo, hi), max(lo, hi)
        for bx, ys in zip(self.bucket_x, self.bucket_y):
            if lo - 1e-12 <= bx <= hi + 1e-12 and ys[-1] - ys[0] > self.y_tol:
                return True
        return False

    def _fit(self):
        ys = np.array([v[0] for v in self.bucket_y])
        if self.interpolation == "linear":
            return lambda x: np.interp(x, self.bucket_x, ys), None
        p = PchipInterpolator(self.bucket_x, ys)
        return p, p.derivative()

    def derivative(self, x: float) -> float:
        """dφ/dx at ``x``: exact when F factors through m, else from the interpolant."""
        through = getattr(self.F, "through_measure", None)
        if through is not None:
            return float(through[1](x))
        if self.interpolation == "linear":
            # one-sided slopes agree except at a knot; take the right slope there
            xs = self.bucket_x
            ys = np.array([v[0] for v in self.bucket_y])
            j = int(np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2))
            return float((ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]))
        return float(self._fit()[1](x))

    def rows(self) -> list:
        return [(float(bx), float(y)) for bx, ys in zip(self.bucket_x, self.bucket_y) for y in ys]

    def to_json(self) -> dict:
        out = {
            "points": [[x, y] for x, y in self.rows()],
            "single_valued": self.single_valued,
        }
        if self.witness is not None:
            out["witness"] = [s.to_json() for s in self.witness]
        return out


def build_gamma(F: Callable, universe: FiniteUniverse, m: Callable = measure_finite,
                samples: int = 100_000, rng: np.random.Generator | None = None,
                interpolation: str = "pchip", y_tol: float = 1e-9) -> GammaCurve:
    """All ``(m(A), F(A))`` for ``n <= 16``, otherwise ``samples`` random subsets.

    Measures equal to within ``1e-12·m(Ω)`` share a bucket.  The first pair
    of subsets with equal measure and different values is kept as a witness
    of multivaluedness.
    """
    if interpolation not in ("pchip", "linear"):
        raise ValueError("interpolation must be 'pchip' or 'linear'")
    if universe.n <= ENUMERATION_LIMIT:
        family = list(universe.subsets(ENUMERATION_LIMIT))
    else:
        rng = rng or np.random.default_rng(0)
        family = [universe.empty, universe.full]
        family += [universe.random_subset(rng) for _ in range(samples)]
    x = np.array([float(m(A)) for A in family])
    y = np.array([float(F(A)) for A in family])
    order = np.argsort(x, kind="stable")
    gap = 1e-12 * max(1.0, float(x.max(initial=0.0)))
    bx, by, witness = [], [], None
    start = 0
    for pos in range(1, len(order) + 1):
        if pos < len(order) and x[order[pos]] - x[order[pos - 1]] <= gap:
            continue
        idx = order[start:pos]
        vals = y[idx]
        bx.append(float(x[idx[0]]))
        distinct = np.unique(vals)
        by.append(tuple(float(v) for v in distinct))
        if witness is None and distinct[-1] - distinct[0] > y_tol:
            witness = (family[idx[int(np.argmin(vals))]], family[idx[int(np.argmax(vals))]])
        start = pos
    return GammaCurve(x, y, np.array(bx), tuple(by), witness, F, m, interpolation, y_tol)


def mean_value_theta(curve: GammaCurve, A: Subset, B: Subset, tol: float = 1e-6,
                     grid: int = 10_000) -> float:
    """θ ∈ [0, 1] with ``(F(B) − F(A)) / (m(B) − m(A)) = φ'(m(A) + θ(m(B) − m(A)))``.

    θ = 0.5 is returned whenever it works.
    """
    xa, xb = float(curve.m(A)), float(curve.m(B))
    if xa == xb:
        raise ZeroDenominatorError("m(A) == m(B)")
    if curve.multivalued_between(xa, xb):
        raise MultivaluedCurveError(f"γ is multivalued on [{min(xa, xb)}, {max(xa, xb)}]")
    q = (float(curve.F(B)) - float(curve.F(A))) / (xb - xa)
    theta, err = find_theta(lambda t: curve.derivative(xa + t * (xb - xa)) - q, grid, tol)
    if err > tol:
        raise NoWitnessError(f"no θ with φ' = {q} (closest residual {err:.3g})")
    return theta


@dataclass(frozen=True)
class BridgeReport:
    set_derivative: float
    curve_derivative: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return abs(self.set_derivative - self.curve_derivative) <= self.tolerance


def lightest_schedule(universe: FiniteUniverse, horizon: int = 16) -> SetSequence:
    """Constant ``{ω}`` for the element of smallest weight: the smallest admissible variation."""
    i = int(np.argmin(np.asarray(universe.weights, dtype=float)))
    B = universe.from_indices([i])
    return SetSequence(lambda n: B, horizon, name=f"{{{universe.elements[i]}}}")


def derivative_bridge_check(F: Callable, A: Subset, m: Callable = measure_finite,
                            seq: SetSequence | None = None, curve: GammaCurve | None = None,
                            tolerance: float = 1e-3) -> BridgeReport:
    """Compare the set derivative along small variations with φ'(m(A))."""
    seq = seq or lightest_schedule(A.universe)
    rep = derivative_along(F, m, A, seq, tolerance)
    left = rep.value if rep.value is not None else (rep.lower + rep.upper) / 2
    if curve is None:
        curve = build_gamma(F, A.universe, m)
    return BridgeReport(float(left), curve.derivative(float(m(A))), tolerance)
