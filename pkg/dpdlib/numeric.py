"""
Numeric capability registry.

Element types opt into the numeric DPD family (sum, product, min, max, avg) by
registering plus/times/negate/compare/to_real, and say whether plus and
times commute (a matrix type does not). Lookup walks the value's MRO, so
numpy scalar types are covered by their abstract bases.
"""

import fractions
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from .errors import DistError


@dataclass(frozen=True)
class Numeric:
    plus: Callable
    times: Callable
    negate: Callable
    compare: Callable  # negative, zero or positive like a three-way comparison
    to_real: Callable
    commutative: bool = True


def _three_way(a, b):
    return (a > b) - (a < b)


_REAL = Numeric(
    plus=lambda a, b: a + b,
    times=lambda a, b: a * b,
    negate=lambda a: -a,
    compare=_three_way,
    to_real=float,
)

_REGISTRY: Dict[type, Numeric] = {
    int: _REAL,
    float: _REAL,
    fractions.Fraction: _REAL,
    np.integer: _REAL,
    np.floating: _REAL,
}


def register_numeric(cls, numeric):
    """Make cls usable with sum_d/product_d/min_d/max_d/avg_d."""
    _REGISTRY[cls] = numeric


def numeric_for(value) -> Numeric:
    for cls in type(value).__mro__:
        if cls is bool:
            break
        numeric = _REGISTRY.get(cls)
        if numeric is not None:
            return numeric
    raise DistError(f"type {type(value).__name__} has no registered numeric operations")
