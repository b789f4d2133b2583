"""Finite ground sets, subsets as bitmasks, the additive measure and the
symmetric-difference metric.

A subset is stored as a Python ``int`` whose bit ``i`` marks membership of
element ``i``.  Python integers are unbounded, so the same representation
serves the 24-element universes used for exhaustive checks and the
several-thousand-cell grids used by the optimization module.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import UniverseMismatchError, UniverseTooLargeError

#: Hard cap on the size of a universe whose power set may be enumerated.
MAX_ENUMERATION = 24


@dataclass(frozen=True)
class FiniteUniverse:
    """Ordered finite ground set with a strictly positive weight per element."""

    elements: tuple
    weights: tuple
    _index: dict = field(init=False, repr=False, compare=False)
    _uniform: bool = field(init=False, repr=False, compare=False)
    _exact: bool = field(init=False, repr=False, compare=False)
    _warray: Any = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        elements = tuple(self.elements)
        weights = tuple(self.weights)
        if len(elements) != len(weights):
            raise ValueError(
                f"{len(elements)} elements but {len(weights)} weights"
            )
        if not elements:
            raise ValueError("a universe needs at least one element")
        index = {}
        for i, e in enumerate(elements):
            if e in index:
                raise ValueError(f"duplicate element identifier {e!r}")
            index[e] = i
        for e, w in zip(elements, weights):
            if isinstance(w, bool) or not isinstance(w, Real):
                raise TypeError(f"weight of {e!r} is not a real number: {w!r}")
            # positivity rather than H != 0: p1 fails for mixed signs
            if not w > 0:
                raise ValueError(f"weight of {e!r} must be strictly positive, got {w!r}")
        exact = all(isinstance(w, (int, Fraction)) for w in weights)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_uniform", len(set(weights)) == 1)
        object.__setattr__(self, "_exact", exact)
        warray = np.array(weights, dtype=object if exact else float)
        object.__setattr__(self, "_warray", warray)

    # construction helpers -------------------------------------------------

    @classmethod
    def unit(cls, n: int, prefix: str = "w") -> FiniteUniverse:
        """``n`` elements named ``w1..wn`` with unit weight."""
        return cls(tuple(f"{prefix}{i + 1}" for i in range(n)), (1,) * n)

    @classmethod
    def from_weights(cls, weights: Sequence[Real], prefix: str = "w") -> FiniteUniverse:
        return cls(tuple(f"{prefix}{i + 1}" for i in range(len(weights))), tuple(weights))

    def exact(self) -> FiniteUniverse:
        """Same universe with weights converted to exact rationals."""
        return FiniteUniverse(self.elements, tuple(Fraction(w) for w in self.weights))

    # basic queries --------------------------------------------------------

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def is_exact(self) -> bool:
        return self._exact

    @property
    def weight_array(self) -> np.ndarray:
        return self._warray

    def index(self, element) -> int:
        try:
            return self._index[element]
        except KeyError:
            raise KeyError(f"{element!r} is not an element of this universe") from None

    def subset(self, elements: Iterable = ()) -> Subset:
        mask = 0
        for e in elements:
            mask |= 1 << self.index(e)
        return Subset(self, mask)

    def from_indices(self, indices: Iterable[int]) -> Subset:
        mask = 0
        for i in indices:
            if not 0 <= i < self.n:
                raise IndexError(i)
            mask |= 1 << i
        return Subset(self, mask)

    def from_array(self, flags) -> Subset:
        """Subset from a boolean array of length ``n``."""
        flags = np.asarray(flags, dtype=bool)
        if flags.shape != (self.n,):
            raise ValueError(f"expected a flag array of shape ({self.n},), got {flags.shape}")
        raw = np.packbits(flags, bitorder="little").tobytes()
        return Subset(self, int.from_bytes(raw, "little"))

    @property
    def empty(self) -> Subset:
        return Subset(self, 0)

    @property
    def full(self) -> Subset:
        return Subset(self, (1 << self.n) - 1)

    def singleton(self, element) -> Subset:
        return Subset(self, 1 << self.index(element))

    def check_enumerable(self, limit: int = MAX_ENUMERATION) -> None:
        limit = min(limit, MAX_ENUMERATION)
        if self.n > limit:
            raise UniverseTooLargeError(
                f"universe has {self.n} elements; exhaustive enumeration is capped at {limit}"
            )

    def subsets(self, limit: int = MAX_ENUMERATION) -> Iterator[Subset]:
        """All ``2**n`` subsets in mask order (bit ``i`` is element ``i``)."""
        self.check_enumerable(limit)
        for mask in range(1 << self.n):
            yield Subset(self, mask)

    def random_subset(self, rng: np.random.Generator, p: float = 0.5) -> Subset:
        return self.from_array(rng.random(self.n) < p)

    # serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "weights": [_jsonable(w) for w in self.weights]}

    @classmethod
    def from_json(cls, doc: Mapping | str) -> FiniteUniverse:
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            elements = doc["elements"]
            weights = doc["weights"]
        except (KeyError, TypeError):
            raise ValueError('universe JSON needs "elements" and "weights"') from None
        return cls(tuple(elements), tuple(_parse_number(w) for w in weights))


@dataclass(frozen=True)
class Subset:
    """A subset of a :class:`FiniteUniverse`, stored as a membership bitmask."""

    universe: FiniteUniverse
    mask: int

    def __post_init__(self):
        if not 0 <= self.mask < (1 << self.universe.n):
            raise ValueError("mask does not fit the universe")

    def _other(self, other: Subset) -> int:
        if not isinstance(other, Subset):
            raise TypeError(f"expected a Subset, got {type(other).__name__}")
        if other.universe is not self.universe and other.universe != self.universe:
            raise UniverseMismatchError("subsets belong to different universes")
        return other.mask

    def __or__(self, other: Subset) -> Subset:
        return Subset(self.universe, self.mask | self._other(other))

    def __and__(self, other: Subset) -> Subset:
        return Subset(self.universe, self.mask & self._other(other))

    def __sub__(self, other: Subset) -> Subset:
        return Subset(self.universe, self.mask & ~self._other(other))

    def __xor__(self, other: Subset) -> Subset:
        return Subset(self.universe, self.mask ^ self._other(other))

    def __invert__(self) -> Subset:
        return Subset(self.universe, ~self.mask & ((1 << self.universe.n) - 1))

    def __le__(self, other: Subset) -> bool:
        return self.mask & ~self._other(other) == 0

    def __lt__(self, other: Subset) -> bool:
        return self <= other and self.mask != other.mask

    def __ge__(self, other: Subset) -> bool:
        return other <= self

    def __gt__(self, other: Subset) -> bool:
        return other < self

    def issubset(self, other: Subset) -> bool:
        return self <= other

    def isdisjoint(self, other: Subset) -> bool:
        return self.mask & self._other(other) == 0

    def __bool__(self) -> bool:
        return self.mask != 0

    def __len__(self) -> int:
        return self.mask.bit_count()

    def indices(self) -> list[int]:
        out = []
        mask = self.mask
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out

    def __iter__(self) -> Iterator:
        elements = self.universe.elements
        return (elements[i] for i in self.indices())

    def __contains__(self, element) -> bool:
        i = self.universe._index.get(element)
        return i is not None and bool(self.mask >> i & 1)

    def names(self) -> list:
        return list(self)

    def to_array(self) -> np.ndarray:
        n = self.universe.n
        raw = self.mask.to_bytes((n + 7) // 8, "little")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return bits[:n].astype(bool)

    def __repr__(self) -> str:
        if self.universe.n > 32:
            return f"Subset(<{len(self)} of {self.universe.n} elements>)"
        return "{" + ", ".join(map(str, self)) + "}"

    def to_json(self) -> list:
        """Element names in universe order."""
        return self.names()


def subset_from_json(universe: FiniteUniverse, names: Sequence) -> Subset:
    return universe.subset(names)


def measure_finite(A: Subset):
    """Additive measure: 0 for the empty set, otherwise the total weight of A.

    Exact (``int``/``Fraction``) weights give an exact result.
    """
    u = A.universe
    mask = A.mask
    if not mask:
        return 0
    if u._uniform:
        return u.weights[0] * mask.bit_count()
    if u.n > 64 and not u._exact:
        return float(u._warray[A.to_array()].sum())
    weights = u.weights
    total = 0
    while mask:
        low = mask & -mask
        total += weights[low.bit_length() - 1]
        mask ^= low
    return total


def symmetric_difference(A: Subset, B: Subset) -> Subset:
    """(A \\ B) ∪ (B \\ A)."""
    return A ^ B


def distance(A: Subset, B: Subset):
    """ρ(A, B) = m(A Δ B)."""
    return measure_finite(A ^ B)


def measure_table(universe: FiniteUniverse, limit: int = MAX_ENUMERATION) -> np.ndarray:
    """Measures of all ``2**n`` subsets, indexed by mask (float)."""
    universe.check_enumerable(limit)
    table = np.zeros(1, dtype=float)
    for w in universe.weights:
        table = np.concatenate([table, table + float(w)])
    return table


def measure_table_exact(universe: FiniteUniverse, limit: int = MAX_ENUMERATION):
    """Exact measures of all subsets as integer numerators over a common denominator.

    Returns ``(numerators, denominator)`` with ``m(mask) = numerators[mask] / denominator``.
    The numerators are ``int64`` when they fit, Python ints otherwise.
    """
    universe.check_enumerable(limit)
    fracs = [Fraction(w) for w in universe.weights]
    denom = 1
    for f in fracs:
        denom = math.lcm(denom, f.denominator)
    nums = [int(f * denom) for f in fracs]
    dtype = np.int64 if sum(nums) < 2**62 else object
    table = np.zeros(1, dtype=dtype)
    for k in nums:
        table = np.concatenate([table, table + k])
    return table, denom


def _jsonable(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    return x


def _parse_number(x):
    """JSON number or string such as ``"1/3"`` to int/Fraction/float."""
    if isinstance(x, bool):
        raise TypeError(f"not a number: {x!r}")
    if isinstance(x, (int, Fraction)):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not a number: {x!r}")
