"""Independent reference implementations used only by the tests.

These deliberately avoid the package's fast paths: plain Python sets,
itertools enumeration and closed forms.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def naive_measure(weights: dict, members) -> Fraction | float:
    return sum((weights[e] for e in set(members)), 0)


def naive_subsets(elements):
    for r in range(len(elements) + 1):
        for combo in itertools.combinations(elements, r):
            yield frozenset(combo)


def naive_sigma(xs, k: int):
    if k == 0:
        return 1
    return sum((math.prod(c) for c in itertools.combinations(xs, k)), 0)


def naive_lower_upper(terms: list[frozenset], start: int) -> tuple[frozenset, frozenset]:
    """⋂ and ⋃ of the tail starting at 0-based ``start``."""
    tail = terms[start:]
    lower = frozenset.intersection(*tail)
    upper = frozenset.union(*tail)
    return lower, upper


def integer_exp_series() -> float:
    """Σ_{n∈ℤ} e^{−|n|} = 1 + 2/(e − 1)."""
    return 1 + 2 / (math.e - 1)


def brute_partition_min(costs) -> tuple[float, tuple]:
    """Minimum of Σ_c costs[label_c][c] over all k^N labelings."""
    k, n = len(costs), len(costs[0])
    best, arg = math.inf, None
    for labels in itertools.product(range(k), repeat=n):
        v = math.fsum(costs[l][c] for c, l in enumerate(labels))
        if v < best:
            best, arg = v, labels
    return best, arg


def brute_partition_min_numpy(costs) -> float:
    """Same minimum, vectorized over all labelings (for N up to ~12)."""
    import numpy as np

    costs = np.asarray(costs, dtype=float)
    k, n = costs.shape
    labels = np.array(list(itertools.product(range(k), repeat=n)))
    return float(costs[labels, np.arange(n)].sum(axis=1).min())


def least_squares_oracle(columns, target):
    """Coefficients from numpy's SVD least squares on the explicit design matrix."""
    import numpy as np

    S = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    coef, *_ = np.linalg.lstsq(S, np.asarray(target, dtype=float), rcond=None)
    return coef
