"""Input validation helpers.

Small checkers used by parameter containers, the config parser and the
estimator front end. They raise ValueError (or ConfigError where noted) with
the offending name in the message, so callers can surface actionable errors.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import LengthMismatch


def check_count(name: str, value, minimum: int = 1) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_probability(name: str, value) -> float:
    value = check_finite(name, value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")
    return value


def check_positive(name: str, value) -> float:
    value = check_finite(name, value)
    if value <= 0.0:
        raise ValueError(f"{name} must be > 0, got {value}")
    return value


def check_non_negative(name: str, value) -> float:
    value = check_finite(name, value)
    if value < 0.0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return value


def check_finite(name: str, value) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def as_float_vector(name: str, values: Sequence, length: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite everywhere")
    if length is not None and arr.shape[0] != length:
        raise LengthMismatch(f"{name} must have length {length}, got {arr.shape[0]}")
    return arr


def check_bounds(lower: Sequence, upper: Sequence) -> tuple[np.ndarray, np.ndarray]:
    lo = as_float_vector("lower_bounds", lower)
    hi = as_float_vector("upper_bounds", upper, length=lo.shape[0])
    if not np.all(lo < hi):
        raise ValueError("lower_bounds must be strictly below upper_bounds elementwise")
    return lo, hi
