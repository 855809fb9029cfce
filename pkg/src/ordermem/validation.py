"""Small input-validation helpers used throughout the package."""

from __future__ import annotations

from typing import Any

import numpy as np

from .errors import DataError


def as_sign_array(signs: Any) -> np.ndarray:
    """Coerce a sign container to a 1-D int8 array of -1/+1 values.

    Accepts a SignSeries (uses its ``signs`` attribute), any sequence, or
    an ndarray.  Raises DataError when the values are not all +/-1.
    """
    signs = getattr(signs, "signs", signs)
    arr = np.asarray(signs)
    if arr.ndim != 1:
        raise DataError(f"sign series must be 1-D, got shape {arr.shape}")
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind == "f":
            rounded = arr.astype(np.int64)
            if not np.array_equal(rounded, arr):
                raise DataError("sign series may contain only -1 and +1")
            arr = rounded
        else:
            raise DataError(f"sign series has non-numeric dtype {arr.dtype}")
    if arr.size:
        mag = np.abs(arr)
        if int(mag.max()) != 1 or int(mag.min()) != 1:
            raise DataError("sign series may contain only -1 and +1")
    return arr.astype(np.int8, copy=False)


def check_int(name: str, value: Any, lo: int | None = None, hi: int | None = None) -> int:
    """Validate an integer-valued parameter, with optional closed bounds."""
    if isinstance(value, bool) or int(value) != value:
        raise DataError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if lo is not None and value < lo:
        raise DataError(f"{name} must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise DataError(f"{name} must be <= {hi}, got {value}")
    return value


def check_finite(name: str, value: Any) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise DataError(f"{name} must be finite, got {value!r}")
    return value


def check_positive(name: str, value: Any) -> float:
    value = check_finite(name, value)
    if value <= 0:
        raise DataError(f"{name} must be positive, got {value}")
    return value


def ensure_rng(seed: Any = None) -> np.random.Generator:
    """Return a numpy Generator from a seed, Generator, or None."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
