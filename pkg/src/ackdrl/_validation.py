"""Input validation helpers."""
from __future__ import annotations

import math
import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import ConfigError, ShapeError


def check_observations(X, obs_dim: int) -> np.ndarray:
    """Return ``X`` as a finite float64 ``(n, obs_dim)`` array; a single vector becomes one row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    X = check_array(X, dtype=np.float64, ensure_all_finite=True)
    if X.shape[1] != obs_dim:
        raise ShapeError(f"expected observations of width {obs_dim}, got {X.shape[1]}")
    return X


def check_int(value, name, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"must be an integer, got {value!r}", field=name)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", field=name)
    return int(value)


def check_float(value, name, low=None, high=None, low_inclusive=True, high_inclusive=True) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not math.isfinite(value):
        raise ConfigError(f"must be a finite number, got {value!r}", field=name)
    value = float(value)
    if low is not None and (value < low or (value == low and not low_inclusive)):
        raise ConfigError(f"must be {'>=' if low_inclusive else '>'} {low}, got {value}", field=name)
    if high is not None and (value > high or (value == high and not high_inclusive)):
        raise ConfigError(f"must be {'<=' if high_inclusive else '<'} {high}, got {value}", field=name)
    return value
