"""
Validation utilities for the dpdlib autograder
"""

import math
from typing import Any, List, Sequence
from dataclasses import dataclass

import numpy as np


@dataclass
class ValidationResult:
    """Result of a validation check"""
    is_valid: bool
    message: str
    details: Any = None


def validate_running_fold(got: Sequence, values: Sequence, combine) -> ValidationResult:
    """Compare per-member scan results against the serial running fold."""
    expected = []
    for v in values:
        expected.append(v if not expected else combine(expected[-1], v))
    if list(got) != expected:
        return ValidationResult(False, f"Expected {expected!r}, got {list(got)!r}")
    return ValidationResult(True, "Matches serial running fold")


def validate_root_only(results: List, root: int, expected) -> ValidationResult:
    """Present (and equal to expected) at root, absent everywhere else."""
    for rank, result in enumerate(results):
        if rank == root:
            if not result.is_present or result.get() != expected:
                return ValidationResult(False, f"Root {root} holds {result!r}, expected {expected!r}")
        elif result.is_present:
            return ValidationResult(False, f"Rank {rank} holds {result!r} but is not the root")
    return ValidationResult(True, "Result present at root only")


def validate_all_equal(results: List, expected) -> ValidationResult:
    """Every rank holds a present value equal to expected."""
    bad = [rank for rank, r in enumerate(results) if not r.is_present or r.get() != expected]
    if bad:
        return ValidationResult(False, f"Ranks {bad[:8]} disagree with {expected!r}",
                                {'results': [repr(r) for r in results]})
    return ValidationResult(True, "All ranks agree")


def validate_counts(record, rounds: int, messages: int) -> ValidationResult:
    """Measured rounds and messages of one merged operation record."""
    if record is None:
        return ValidationResult(False, "No operation recorded")
    if record.rounds != rounds or record.messages != messages:
        return ValidationResult(False, f"Measured {record.rounds} rounds / {record.messages} messages, "
                                       f"expected {rounds} / {messages}")
    return ValidationResult(True, f"{rounds} rounds, {messages} messages")


def validate_relative(value: float, reference: float, rtol: float) -> ValidationResult:
    """Relative difference below rtol."""
    if value is None:
        return ValidationResult(False, "No value")
    delta = abs(value - reference) / abs(reference) if reference else abs(value)
    if delta >= rtol:
        return ValidationResult(False, f"Relative difference {delta:.3e} exceeds {rtol:g}",
                                {'value': value, 'reference': reference})
    return ValidationResult(True, f"Relative difference {delta:.3e}")


def validate_absolute(value: float, reference: float, atol: float) -> ValidationResult:
    if value is None or not abs(value - reference) < atol:
        return ValidationResult(False, f"|{value} - {reference}| not below {atol:g}")
    return ValidationResult(True, f"Within {atol:g}")


def validate_matrix(got: np.ndarray, expected: np.ndarray, exact=False, atol=1e-9) -> ValidationResult:
    """Elementwise equality (bit-identical when exact, +inf compared as equal)."""
    got = np.asarray(got)
    expected = np.asarray(expected)
    if got.shape != expected.shape:
        return ValidationResult(False, f"Shape {got.shape}, expected {expected.shape}")
    ok = np.array_equal(got, expected) if exact else np.allclose(got, expected, rtol=0, atol=atol)
    if not ok:
        finite = np.isfinite(expected) & np.isfinite(got)
        worst = float(np.max(np.abs(got[finite] - expected[finite]))) if finite.any() else math.inf
        return ValidationResult(False, f"Matrices differ (max finite difference {worst:.3e})")
    return ValidationResult(True, "Matrices match")


def combine_results(results: List[ValidationResult]) -> ValidationResult:
    """First failure wins; otherwise a pass summarizing the number of checks."""
    for result in results:
        if not result.is_valid:
            return result
    return ValidationResult(True, f"{len(results)} checks passed")
