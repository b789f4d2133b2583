"""Set functions as symmetric functions of per-element values.

Elementary symmetric polynomials σ_k of the values in a subset, the count
and enumeration of compositions φ(σ_{i1}, ..., σ_{im}), and least-squares
decomposition of a set function on the σ basis over all 2^n subsets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Sequence

import numpy as np

from .calculus import SetFunction
from .errors import SingularGramError, UniverseTooLargeError
from .expr import Expression, phi_expression
from .finite_core import FiniteUniverse, Subset

#: Largest universe for which sums over all subsets are computed.
MAX_INNER_PRODUCT = 20
ILL_CONDITIONED = 1e12


@dataclass(frozen=True)
class ElementValues:
    """A value x(ω) attached to every element of a universe."""

    universe: FiniteUniverse
    values: tuple

    def __post_init__(self):
        values = tuple(self.values)
        if len(values) != self.universe.n:
            raise ValueError(f"need {self.universe.n} values, got {len(values)}")
        object.__setattr__(self, "values", values)

    @classmethod
    def of(cls, values: Sequence) -> ElementValues:
        """Values on a fresh unit-weight universe ``w1..wn``."""
        return cls(FiniteUniverse.unit(len(values)), tuple(values))

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Rational) for v in self.values)

    def of_subset(self, A: Subset) -> list:
        return [self.values[i] for i in A.indices()]


def _sigmas(xs: Sequence, k_max: int) -> list:
    """σ_0..σ_{k_max} of ``xs`` via the product expansion of ∏(1 + x t)."""
    e = [1] + [0] * k_max
    for count, x in enumerate(xs, start=1):
        for j in range(min(count, k_max), 0, -1):
            e[j] = e[j] + x * e[j - 1]
    return e


def elementary_symmetric(A: Subset, values: ElementValues, k: int):
    """σ_k of the values of the elements of ``A``; σ_0 = 1, σ_k = 0 for k > |A|."""
    if not 0 <= k <= values.n:
        raise ValueError(f"order k={k} outside 0..{values.n}")
    return _sigmas(values.of_subset(A), k)[k]


def elementary_symmetric_all(A: Subset, values: ElementValues) -> list:
    """[σ_0, σ_1, ..., σ_n] for ``A``."""
    return _sigmas(values.of_subset(A), values.n)


def sigma_function(k: int, values: ElementValues) -> SetFunction:
    return SetFunction(lambda A: elementary_symmetric(A, values, k), f"σ{k}", True, f"σ{k}")


def sigma_table(values: ElementValues, exact: bool = False) -> np.ndarray:
    """σ_0..σ_n for every subset, shape ``(2**n, n+1)``, rows indexed by mask.

    Built by doubling: adding element i multiplies each row's generating
    polynomial by (1 + x_i t).
    """
    n = values.n
    if n > MAX_INNER_PRODUCT:
        raise UniverseTooLargeError(f"n={n} > {MAX_INNER_PRODUCT}")
    dtype = object if exact else float
    table = np.zeros((1, n + 1), dtype=dtype)
    table[0, 0] = 1
    for x in values.values:
        x = Fraction(x) if exact else float(x)
        grown = table.copy()
        grown[:, 1:] = grown[:, 1:] + x * table[:, :-1]
        table = np.concatenate([table, grown])
    return table


# --------------------------------------------------------------------------
# compositions φ(σ_{i1}, ..., σ_{im})
# --------------------------------------------------------------------------


def count_compositions(n: int, m: int) -> int:
    """n!/(n−m)!: injective placements of m of the n σ's into φ's slots."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    return math.perm(n, m)


def count_suite_variants(n: int) -> int:
    """Σ_{i=1}^{n} n!/(n−i)!."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return sum(math.perm(n, i) for i in range(1, n + 1))


def assignments(n: int, m: int, order: str = "grouped"):
    """Injective maps from φ's m slots to σ indices 1..n.

    ``order="grouped"`` lists index sets in lexicographic order and, within
    each set, its arrangements in lexicographic order: (1,2), (2,1), (1,3),
    (3,1), (2,3), (3,2) for n=3, m=2.  ``order="lexicographic"`` is plain
    lexicographic order of the tuples.
    """
    count_compositions(n, m)
    if order == "grouped":
        for combo in itertools.combinations(range(1, n + 1), m):
            yield from itertools.permutations(combo)
    elif order == "lexicographic":
        yield from itertools.permutations(range(1, n + 1), m)
    else:
        raise ValueError(f"unknown order {order!r}")


def enumerate_compositions(phi: Expression | str, values: ElementValues, n: int | None = None,
                           order: str = "grouped") -> list[SetFunction]:
    """One set function per injective assignment of σ indices to φ's arguments."""
    if isinstance(phi, str):
        phi = phi_expression(phi)
    n = values.n if n is None else n
    if n > values.n:
        raise ValueError(f"n={n} exceeds the number of element values {values.n}")
    m = phi.arity
    out = []
    for assign in assignments(n, m, order):
        rename = {f"t{j + 1}": f"σ{i}" for j, i in enumerate(assign)}
        symbol = phi.render(rename)

        def evaluate(A, assign=assign):
            sig = elementary_symmetric_all(A, values)
            return phi(*(sig[i] for i in assign))

        out.append(SetFunction(evaluate, symbol, True, symbol))
    return out


# --------------------------------------------------------------------------
# inner product and least-squares decomposition
# --------------------------------------------------------------------------


def function_table(F: Callable, universe: FiniteUniverse, exact: bool = False) -> np.ndarray:
    """F evaluated on every subset, indexed by mask."""
    if universe.n > MAX_INNER_PRODUCT:
        raise UniverseTooLargeError(f"n={universe.n} > {MAX_INNER_PRODUCT}")
    vals = [F(A) for A in universe.subsets(MAX_INNER_PRODUCT)]
    if exact:
        return np.array([Fraction(v) for v in vals], dtype=object)
    return np.array(vals, dtype=float)


def inner_product(F1: Callable, F2: Callable, universe: FiniteUniverse, exact: bool = False):
    """Σ over all 2^n subsets (∅ included) of F1(A)·F2(A).

    The float sum is exactly rounded, so it does not depend on summation order.
    """
    t1 = function_table(F1, universe, exact)
    t2 = function_table(F2, universe, exact)
    if exact:
        return sum((a * b for a, b in zip(t1, t2)), Fraction(0))
    return math.fsum(t1 * t2)


@dataclass(frozen=True)
class DecompositionResult:
    coefficients: tuple
    orders: tuple
    residual: float
    condition: float
    rank: int
    ill_conditioned: bool
    exact: bool
    values: ElementValues

    @property
    def include_unit(self) -> bool:
        return 0 in self.orders

    def coefficient(self, k: int):
        return self.coefficients[self.orders.index(k)] if k in self.orders else 0

    def __call__(self, A: Subset):
        sig = elementary_symmetric_all(A, self.values)
        return sum((c * sig[k] for c, k in zip(self.coefficients, self.orders)),
                   Fraction(0) if self.exact else 0.0)

    def as_set_function(self) -> SetFunction:
        return SetFunction(self, "F̃", True, " + ".join(
            f"{c}·σ{k}" for c, k in zip(self.coefficients, self.orders)))

    def to_json(self) -> dict:
        return {
            "coefficients": {f"c{k}": float(c) for c, k in zip(self.coefficients, self.orders)},
            "residual": float(self.residual),
            "condition": float(self.condition),
            "rank": self.rank,
            "ill_conditioned": self.ill_conditioned,
            "exact": self.exact,
        }


def _solve_exact(G: list, rhs: list) -> list:
    """Gauss-Jordan elimination over the rationals with partial pivoting."""
    n = len(G)
    M = [list(row) + [b] for row, b in zip(G, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            raise SingularGramError(f"basis column {col} is linearly dependent")
        M[col], M[pivot] = M[pivot], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def decompose(F: Callable, values: ElementValues, include_unit: bool = False,
              exact: bool = False) -> DecompositionResult:
    """Least-squares coefficients of ``F`` on σ_1..σ_n (and σ_0 ≡ 1 if requested).

    Solves the normal equations ⟨F, σ_j⟩ = Σ_k c_k ⟨σ_k, σ_j⟩.  Exact mode
    works over the rationals.  Float mode rescales each basis function to
    unit norm and solves by SVD; a Gram matrix with condition number above
    1e12 is flagged and its minimum-norm solution returned.
    """
    n = values.n
    orders = tuple(range(0 if include_unit else 1, n + 1))
    S = sigma_table(values, exact)[:, list(orders)]
    f = function_table(F, values.universe, exact)

    if exact:
        cols = [list(S[:, j]) for j in range(len(orders))]
        G = [[sum((a * b for a, b in zip(ci, cj)), Fraction(0)) for cj in cols] for ci in cols]
        rhs = [sum((a * b for a, b in zip(ci, f)), Fraction(0)) for ci in cols]
        for j, row in enumerate(G):
            if row[j] == 0:
                raise SingularGramError(f"σ_{orders[j]} vanishes on every subset")
        coef = _solve_exact(G, rhs)
        fitted = [sum((c * s for c, s in zip(coef, row)), Fraction(0)) for row in S]
        resid = sum(((a - b) ** 2 for a, b in zip(f, fitted)), Fraction(0))
        Gf = np.array([[float(v) for v in row] for row in G])
        cond = float(np.linalg.cond(Gf)) if np.all(np.isfinite(Gf)) else math.inf
        return DecompositionResult(tuple(coef), orders, resid, cond, len(orders),
                                   cond > ILL_CONDITIONED, True, values)

    S = S.astype(float)
    norms = np.linalg.norm(S, axis=0)
    if np.any(norms == 0):
        k = orders[int(np.argmin(norms))]
        raise SingularGramError(f"σ_{k} vanishes on every subset")
    Sn = S / norms
    G = Sn.T @ Sn
    rhs = Sn.T @ f
    sv = np.linalg.svd(G, compute_uv=False)
    tol = sv[0] * len(orders) * np.finfo(float).eps
    rank = int(np.sum(sv > tol))
    if rank < len(orders):
        raise SingularGramError(
            f"Gram matrix has rank {rank} < {len(orders)}: the σ basis is linearly dependent"
        )
    cond = float(sv[0] / sv[-1])
    scaled, *_ = np.linalg.lstsq(G, rhs, rcond=None)
    coef = scaled / norms
    resid = math.fsum((f - S @ coef) ** 2)
    return DecompositionResult(tuple(float(c) for c in coef), orders, resid, cond, rank,
                               cond > ILL_CONDITIONED, False, values)


def residual_sum_of_squares(F: Callable, values: ElementValues, coefficients: Sequence,
                            orders: Sequence[int]) -> float:
    """S²(c) = Σ_A (F(A) − Σ c_k σ_k(A))², evaluated directly subset by subset."""
    total = []
    for A in values.universe.subsets(MAX_INNER_PRODUCT):
        sig = elementary_symmetric_all(A, values)
        total.append((F(A) - sum(c * sig[k] for c, k in zip(coefficients, orders))) ** 2)
    return math.fsum(total)


def orthogonality_residuals(F: Callable, result: DecompositionResult,
                            normalized: bool = True) -> list:
    """⟨F − F̃, σ_j⟩ for each basis function; normalized by ‖F − F̃‖·‖σ_j‖ in float mode."""
    values = result.values
    exact = result.exact
    S = sigma_table(values, exact)[:, list(result.orders)]
    f = function_table(F, values.universe, exact)
    if exact:
        fitted = [sum((c * s for c, s in zip(result.coefficients, row)), Fraction(0)) for row in S]
        r = [a - b for a, b in zip(f, fitted)]
        return [sum((a * b for a, b in zip(r, S[:, j])), Fraction(0)) for j in range(S.shape[1])]
    S = S.astype(float)
    r = f - S @ np.array(result.coefficients)
    out = []
    rnorm = np.linalg.norm(r)
    for j in range(S.shape[1]):
        ip = math.fsum(r * S[:, j])
        if normalized:
            scale = rnorm * np.linalg.norm(S[:, j])
            ip = ip / scale if scale > 0 else 0.0
        out.append(ip)
    return out
