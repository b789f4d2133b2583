"""Calculus of set functions: measures, limits, derivatives by measure,
symmetric-function decompositions, level-set integrals and grid optimization."""

from .errors import SetCalcError
from .finite_core import FiniteUniverse, Subset, distance, measure_finite, symmetric_difference
from .hybrid_measure import HybridSet, MeasureConfig, measure_hybrid

__all__ = [
    "FiniteUniverse",
    "HybridSet",
    "MeasureConfig",
    "SetCalcError",
    "Subset",
    "distance",
    "measure_finite",
    "measure_hybrid",
    "symmetric_difference",
]

__version__ = "0.1.0"
