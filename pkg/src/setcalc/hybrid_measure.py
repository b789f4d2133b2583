"""Sets on [0, 1] made of intervals, self-similar fractal pieces and isolated
points, together with the measures built from their parts.

Boolean operations act componentwise on the triple ``(K, f, Q)``: the
interval part by exact interval algebra, the fractal part by
identical-or-disjoint matching, the point part as a finite set.  Interval
results that collapse to a single point (e.g. ``[0, 1/2] ∩ [1/2, 1]``) have
zero length and are discarded, so interval algebra is exact up to finite
sets of Lebesgue measure zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Callable, Iterable, Mapping, Sequence

from .errors import PartialFractalOverlapError


def json_number(x):
    """Float when that is lossless, else a ``"p/q"`` string."""
    x = as_number(x)
    if x.denominator == 1:
        return int(x)
    f = float(x)
    return f if Fraction(repr(f)) == x else f"{x.numerator}/{x.denominator}"


def as_number(x):
    """Normalize an endpoint or point to an exact rational where possible.

    Floats are read by their shortest decimal representation, so ``0.7``
    becomes ``7/10``.
    """
    if isinstance(x, bool):
        raise TypeError(f"not a number: {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, Real):
        return Fraction(repr(float(x)))
    raise TypeError(f"not a number: {x!r}")


def _in_unit(x, what: str):
    if not 0 <= x <= 1:
        raise ValueError(f"{what} {x} lies outside [0, 1]")


# --------------------------------------------------------------------------
# Intervals
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Interval:
    a: Fraction
    b: Fraction
    closed_left: bool = True
    closed_right: bool = True

    def __post_init__(self):
        a, b = as_number(self.a), as_number(self.b)
        _in_unit(a, "left endpoint")
        _in_unit(b, "right endpoint")
        if not a < b:
            raise ValueError(
                f"interval needs a < b, got a={a}, b={b}; single points belong in a PointSet"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "closed_left", bool(self.closed_left))
        object.__setattr__(self, "closed_right", bool(self.closed_right))

    @property
    def length(self) -> Fraction:
        return self.b - self.a

    def __contains__(self, x) -> bool:
        if x < self.a or x > self.b:
            return False
        if x == self.a:
            return self.closed_left
        if x == self.b:
            return self.closed_right
        return True

    def __str__(self) -> str:
        left = "[" if self.closed_left else "("
        right = "]" if self.closed_right else ")"
        return f"{left}{self.a}, {self.b}{right}"

    def to_json(self) -> dict:
        return {
            "a": json_number(self.a),
            "b": json_number(self.b),
            "closed_left": self.closed_left,
            "closed_right": self.closed_right,
        }


def closed(a, b) -> Interval:
    return Interval(a, b, True, True)


def open_(a, b) -> Interval:
    return Interval(a, b, False, False)


def closed_open(a, b) -> Interval:
    return Interval(a, b, True, False)


def open_closed(a, b) -> Interval:
    return Interval(a, b, False, True)


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of pairwise-disjoint, sorted, non-degenerate intervals.

    The canonical form merges intervals whose union is connected, so equal
    point sets compare equal.
    """

    intervals: tuple = ()

    def __post_init__(self):
        ivs = tuple(self.intervals)
        for iv in ivs:
            if not isinstance(iv, Interval):
                raise TypeError(f"expected Interval, got {type(iv).__name__}")
        for left, right in zip(ivs, ivs[1:]):
            if left.b > right.a or (left.b == right.a and left.closed_right and right.closed_left):
                raise ValueError(f"intervals {left} and {right} overlap or are unsorted")
        object.__setattr__(self, "intervals", _canonical(ivs))

    @classmethod
    def of(cls, *intervals: Interval) -> IntervalSet:
        """Union of arbitrary (possibly overlapping) intervals."""
        out = cls()
        for iv in intervals:
            out = out | cls((iv,))
        return out

    @classmethod
    def unit(cls) -> IntervalSet:
        return cls((closed(0, 1),))

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __contains__(self, x) -> bool:
        return any(x in iv for iv in self.intervals)

    @property
    def length(self) -> Fraction:
        return sum((iv.length for iv in self.intervals), Fraction(0))

    def endpoints(self) -> list:
        pts = []
        for iv in self.intervals:
            pts.extend((iv.a, iv.b))
        return pts

    def __or__(self, other: IntervalSet) -> IntervalSet:
        return _boolean(self, other, lambda p, q: p or q)

    def __and__(self, other: IntervalSet) -> IntervalSet:
        return _boolean(self, other, lambda p, q: p and q)

    def __sub__(self, other: IntervalSet) -> IntervalSet:
        return _boolean(self, other, lambda p, q: p and not q)

    def __xor__(self, other: IntervalSet) -> IntervalSet:
        return _boolean(self, other, lambda p, q: p != q)

    def complement(self) -> IntervalSet:
        return IntervalSet.unit() - self

    def issubset(self, other: IntervalSet) -> bool:
        """Inclusion up to finitely many points."""
        return not (self - other)

    def __str__(self) -> str:
        if not self.intervals:
            return "∅"
        return " ∪ ".join(map(str, self.intervals))

    def to_json(self) -> list:
        return [iv.to_json() for iv in self.intervals]


def _canonical(ivs: Sequence[Interval]) -> tuple:
    out: list[Interval] = []
    for iv in ivs:
        if out:
            prev = out[-1]
            # touching with the shared point covered by exactly one side
            if prev.b == iv.a and (prev.closed_right or iv.closed_left):
                out[-1] = Interval(prev.a, iv.b, prev.closed_left, iv.closed_right)
                continue
        out.append(iv)
    return tuple(out)


def _boolean(x: IntervalSet, y: IntervalSet, op: Callable[[bool, bool], bool]) -> IntervalSet:
    if not isinstance(x, IntervalSet) or not isinstance(y, IntervalSet):
        raise TypeError("interval algebra needs two IntervalSets")
    pts = sorted(set(x.endpoints()) | set(y.endpoints()))
    if len(pts) < 2:
        return IntervalSet()
    at_point = [op(p in x, p in y) for p in pts]
    in_gap = []
    for lo, hi in zip(pts, pts[1:]):
        mid = (lo + hi) / 2
        in_gap.append(op(mid in x, mid in y))
    pieces: list[Interval] = []
    start = None
    for i, inside in enumerate(in_gap):
        if not inside:
            continue
        if start is None:
            start = (pts[i], at_point[i])
        # keep extending while the next gap is in and the joining point too
        if i + 1 < len(in_gap) and in_gap[i + 1] and at_point[i + 1]:
            continue
        pieces.append(Interval(start[0], pts[i + 1], start[1], at_point[i + 1]))
        start = None
    return IntervalSet(tuple(pieces))


def lebesgue_length(K: IntervalSet) -> Fraction:
    """Total length of the interval part; endpoint flags do not matter."""
    return K.length


# --------------------------------------------------------------------------
# Fractal components
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class FractalComponent:
    """Self-similar Cantor-like set on the base interval ``[a, b]``.

    Built by keeping ``k`` equally spaced copies scaled by ``r`` at every
    step.  Its similarity dimension is ``ln k / ln(1/r)``.
    """

    a: Fraction
    b: Fraction
    k: int
    r: Real

    def __post_init__(self):
        a, b = as_number(self.a), as_number(self.b)
        _in_unit(a, "fractal base start")
        _in_unit(b, "fractal base end")
        if not a < b:
            raise ValueError(f"fractal base needs a < b, got [{a}, {b}]")
        if isinstance(self.k, bool) or not isinstance(self.k, int):
            raise TypeError(f"piece count must be an int, got {self.k!r}")
        if self.k < 2:
            raise ValueError(f"piece count k={self.k} < 2 is not a fractal")
        r = self.r
        if isinstance(r, bool) or not isinstance(r, Real):
            raise TypeError(f"contraction ratio must be real, got {r!r}")
        if not 0 < r < 1:
            raise ValueError(f"contraction ratio r={r} must lie in (0, 1)")
        if self.k * r > 1:
            raise ValueError(f"k*r = {self.k * r} > 1: the pieces do not fit disjointly")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def cantor(cls, a=0, b=1) -> FractalComponent:
        """Middle-thirds Cantor set on ``[a, b]``."""
        return cls(a, b, 2, Fraction(1, 3))

    @property
    def dimension(self) -> float:
        return math.log(self.k) / math.log(1 / float(self.r))

    @property
    def measure(self) -> float:
        return caratheodory_measure(self)

    def disjoint_from(self, other: FractalComponent) -> bool:
        # sharing one endpoint is a single point, which carries no d-measure
        return self.b <= other.a or other.b <= self.a

    def to_json(self) -> dict:
        r = self.r
        return {
            "a": json_number(self.a),
            "b": json_number(self.b),
            "k": self.k,
            "r": f"{r.numerator}/{r.denominator}" if isinstance(r, Fraction) else r,
        }


def caratheodory_measure(f: FractalComponent) -> float:
    """d-dimensional measure of a self-similar component: ``(b - a) ** d``.

    Normalized so the middle-thirds Cantor set on [0, 1] has measure 1.
    """
    return float(f.b - f.a) ** f.dimension


def _check_fractals(parts: Sequence[FractalComponent]) -> None:
    for i, p in enumerate(parts):
        for q in parts[i + 1:]:
            if p == q or not p.disjoint_from(q):
                raise PartialFractalOverlapError(
                    f"fractal components {p} and {q} within one set must be disjoint"
                )


def _fractal_boolean(xs, ys, op: Callable[[bool, bool], bool]) -> tuple:
    for p in xs:
        for q in ys:
            if p != q and not p.disjoint_from(q):
                raise PartialFractalOverlapError(
                    f"fractal components {p} and {q} partially overlap"
                )
    sx, sy = set(xs), set(ys)
    return tuple(sorted(c for c in sx | sy if op(c in sx, c in sy)))


# --------------------------------------------------------------------------
# Points and hybrid sets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PointSet:
    """Finite sorted set of distinct points in [0, 1]."""

    points: tuple = ()

    def __post_init__(self):
        pts = [as_number(p) for p in self.points]
        for p in pts:
            _in_unit(p, "point")
        object.__setattr__(self, "points", tuple(sorted(set(pts))))

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __bool__(self) -> bool:
        return bool(self.points)

    def __contains__(self, x) -> bool:
        return as_number(x) in set(self.points)

    def _op(self, other: PointSet, op) -> PointSet:
        return PointSet(tuple(op(set(self.points), set(other.points))))

    def __or__(self, other):
        return self._op(other, set.__or__)

    def __and__(self, other):
        return self._op(other, set.__and__)

    def __sub__(self, other):
        return self._op(other, set.__sub__)

    def __xor__(self, other):
        return self._op(other, set.__xor__)

    def issubset(self, other: PointSet) -> bool:
        return set(self.points) <= set(other.points)

    def to_json(self) -> list:
        return [json_number(p) for p in self.points]


@dataclass(frozen=True)
class HybridSet:
    """The triple (K, f, Q): intervals, fractal components, isolated points.

    Points of ``Q`` may lie inside intervals of ``K``; both parts then
    contribute to the measure.
    """

    K: IntervalSet = field(default_factory=IntervalSet)
    fractals: tuple = ()
    Q: PointSet = field(default_factory=PointSet)

    def __post_init__(self):
        K = self.K
        if isinstance(K, Interval):
            K = IntervalSet((K,))
        elif not isinstance(K, IntervalSet):
            K = IntervalSet.of(*K)
        Q = self.Q if isinstance(self.Q, PointSet) else PointSet(tuple(self.Q))
        fr = tuple(sorted(self.fractals))
        _check_fractals(fr)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "fractals", fr)

    def __bool__(self) -> bool:
        return bool(self.K) or bool(self.fractals) or bool(self.Q)

    def _combine(self, other: HybridSet, op) -> HybridSet:
        if not isinstance(other, HybridSet):
            raise TypeError(f"expected HybridSet, got {type(other).__name__}")
        return HybridSet(
            _boolean(self.K, other.K, op),
            _fractal_boolean(self.fractals, other.fractals, op),
            PointSet(tuple(p for p in set(self.Q) | set(other.Q) if op(p in self.Q, p in other.Q))),
        )

    def __or__(self, other):
        return self._combine(other, lambda p, q: p or q)

    def __and__(self, other):
        return self._combine(other, lambda p, q: p and q)

    def __sub__(self, other):
        return self._combine(other, lambda p, q: p and not q)

    def __xor__(self, other):
        return self._combine(other, lambda p, q: p != q)

    def issubset(self, other: HybridSet) -> bool:
        """Componentwise inclusion (interval part up to finitely many points)."""
        return (
            self.K.issubset(other.K)
            and set(self.fractals) <= set(other.fractals)
            and self.Q.issubset(other.Q)
        )

    def __str__(self) -> str:
        parts = [f"K={self.K}"]
        if self.fractals:
            parts.append("f=" + ", ".join(
                f"C[{c.a},{c.b};k={c.k},r={c.r}]" for c in self.fractals))
        parts.append("Q={" + ", ".join(str(p) for p in self.Q) + "}")
        return "(" + "; ".join(parts) + ")"

    def to_json(self) -> dict:
        return {
            "intervals": self.K.to_json(),
            "fractals": [c.to_json() for c in self.fractals],
            "points": self.Q.to_json(),
        }

    @classmethod
    def from_json(cls, doc: Mapping | str) -> HybridSet:
        if isinstance(doc, str):
            doc = json.loads(doc)
        ivs = [
            Interval(
                iv["a"], iv["b"],
                iv.get("closed_left", True), iv.get("closed_right", True),
            )
            for iv in doc.get("intervals", [])
        ]
        frs = [
            FractalComponent(fr["a"], fr["b"], int(fr["k"]), _ratio(fr["r"]))
            for fr in doc.get("fractals", [])
        ]
        return cls(IntervalSet.of(*ivs), tuple(frs), PointSet(tuple(doc.get("points", []))))


def _ratio(r):
    if isinstance(r, str):
        return Fraction(r)
    return r


# --------------------------------------------------------------------------
# Measure configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PointWeight:
    """Strictly positive point weight ``H(x)``."""

    kind: str = "one"
    table: tuple = ()

    def __post_init__(self):
        if self.kind not in ("one", "exp_abs", "table"):
            raise ValueError(f"unknown point weight {self.kind!r}")
        if self.kind == "table":
            tab = tuple(sorted((as_number(x), w) for x, w in dict(self.table).items()))
            for x, w in tab:
                if not w > 0:
                    raise ValueError(f"point weight at {x} must be positive, got {w}")
            object.__setattr__(self, "table", tab)

    @classmethod
    def one(cls) -> PointWeight:
        return cls("one")

    @classmethod
    def exp_abs(cls) -> PointWeight:
        return cls("exp_abs")

    @classmethod
    def from_table(cls, table: Mapping) -> PointWeight:
        return cls("table", tuple(table.items()))

    def __call__(self, x) -> float:
        if self.kind == "one":
            return 1.0
        if self.kind == "exp_abs":
            return math.exp(-abs(float(x)))
        key = as_number(x)
        for p, w in self.table:
            if p == key:
                return float(w)
        raise KeyError(f"no point weight tabulated for {x}")

    def to_json(self):
        if self.kind == "table":
            return {"table": {str(p): w for p, w in self.table}}
        return self.kind

    @classmethod
    def from_json(cls, doc) -> PointWeight:
        if isinstance(doc, str):
            return cls(doc)
        if isinstance(doc, Mapping) and "table" in doc:
            return cls.from_table(doc["table"])
        raise ValueError(f"cannot read point weight {doc!r}")


@dataclass(frozen=True)
class MeasureConfig:
    """Coefficients of the hybrid measure.

    ``alpha`` weights the interval, fractal and point parts in ``eq3`` mode;
    ``c`` weights the point part in ``eq2`` mode.  The two are independent.
    """

    alpha: tuple = (1.0, 1.0, 1.0)
    c: float = 1.0
    H: PointWeight = field(default_factory=PointWeight)

    def __post_init__(self):
        alpha = tuple(self.alpha)
        if len(alpha) != 3:
            raise ValueError("alpha needs three coefficients")
        if not all(a > 0 for a in alpha):
            raise ValueError(f"alpha coefficients must be positive, got {alpha}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        object.__setattr__(self, "alpha", alpha)

    def to_json(self) -> dict:
        return {"alpha": [float(a) for a in self.alpha], "c": float(self.c), "H": self.H.to_json()}

    @classmethod
    def from_json(cls, doc: Mapping | str) -> MeasureConfig:
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(
            tuple(doc.get("alpha", (1.0, 1.0, 1.0))),
            doc.get("c", 1.0),
            PointWeight.from_json(doc.get("H", "one")),
        )


MODES = ("eq2", "eq3")


def point_part_weight(cfg: MeasureConfig, mode: str) -> float:
    return cfg.c if mode == "eq2" else cfg.alpha[2]


def interval_part_weight(cfg: MeasureConfig, mode: str) -> float:
    return 1.0 if mode == "eq2" else cfg.alpha[0]


def measure_hybrid(A: HybridSet, cfg: MeasureConfig | None = None, mode: str = "eq3") -> float:
    """Measure of a hybrid set.

    ``eq2``: length(K) + c·ΣH(x) over Q; fractal parts are not allowed.
    ``eq3``: α₁·length(K) + α₂·Σμ_c(fᵢ) + α₃·ΣH(x) over Q.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    cfg = cfg or MeasureConfig()
    if not A:
        return 0.0
    points = math.fsum(cfg.H(x) for x in A.Q)
    if mode == "eq2":
        if A.fractals:
            raise ValueError("eq2 mode has no fractal term; the set has fractal components")
        return float(A.K.length) + cfg.c * points
    a1, a2, a3 = cfg.alpha
    fractal = math.fsum(caratheodory_measure(f) for f in A.fractals)
    return a1 * float(A.K.length) + a2 * fractal + a3 * points


def sym_diff_hybrid(A: HybridSet, B: HybridSet) -> HybridSet:
    return A ^ B


def distance_hybrid(A: HybridSet, B: HybridSet, cfg: MeasureConfig | None = None,
                    mode: str = "eq3") -> float:
    return measure_hybrid(A ^ B, cfg, mode)


def hybrid(intervals: Iterable[Interval] = (), fractals: Iterable[FractalComponent] = (),
           points: Iterable = ()) -> HybridSet:
    """Convenience constructor accepting overlapping intervals."""
    return HybridSet(IntervalSet.of(*intervals), tuple(fractals), PointSet(tuple(points)))
