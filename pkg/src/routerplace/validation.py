"""Input validation helpers shared by the estimators and the scenario loader."""

from __future__ import annotations

import math
from numbers import Integral, Real

import numpy as np


class ValidationError(ValueError):
    """A value violates a documented invariant.

    ``field`` names the offending parameter so that callers (the CLI, the
    scenario loader) can report it.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


def check_finite(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ValidationError(field, f"expected a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(field, f"must be finite, got {value!r}")
    return value


def check_positive(value, field: str, *, allow_zero: bool = False) -> float:
    value = check_finite(value, field)
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValidationError(field, f"must be {bound}, got {value!r}")
    return value


def check_open_unit(value, field: str) -> float:
    value = check_finite(value, field)
    if not 0.0 < value < 1.0:
        raise ValidationError(field, f"must lie in (0, 1), got {value!r}")
    return value


def check_count(value, field: str, *, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise ValidationError(field, f"expected an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValidationError(field, f"must be >= {minimum}, got {value}")
    return value


def check_points(points, field: str = "positions", n: int | None = None) -> np.ndarray:
    """Coerce ``points`` to a finite float array of shape (n, 2)."""
    try:
        arr = np.asarray(points, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(field, f"not numeric: {exc}") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError(field, f"expected shape (n, 2), got {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValidationError(field, f"expected {n} points, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(field, "contains NaN or infinite coordinates")
    return arr


def check_random_state(seed) -> np.random.Generator:
    """Turn ``seed`` into a :class:`numpy.random.Generator`.

    Accepts ``None``, an int or an existing generator, like sklearn's
    ``check_random_state`` but for the new-style numpy API.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, Integral):
        return np.random.default_rng(seed)
    raise ValidationError("random_state", f"cannot seed a generator from {seed!r}")
