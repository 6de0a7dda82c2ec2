"""Small input-validation helpers shared by the estimators and the harness."""

import numbers

import numpy as np


def check_positive(value, name, *, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    if strict and value <= 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    if not strict and value < 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return float(value)


def check_interval(value, name, low, high, *, closed_low=False, closed_high=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    ok_low = value >= low if closed_low else value > low
    ok_high = value <= high if closed_high else value < high
    if not (ok_low and ok_high):
        lb = "[" if closed_low else "("
        rb = "]" if closed_high else ")"
        raise ValueError(f"{name} must lie in {lb}{low}, {high}{rb}, got {value!r}")
    return float(value)


def check_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value!r}")
    return int(value)


def check_seed(seed):
    """Seeds are unsigned 64-bit integers."""
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def check_vector(x, dim=None, name="x"):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has length {arr.shape[0]}, expected {dim}")
    return arr


def check_batch(X, dim, name="X"):
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise DimensionMismatchError(f"{name} must have shape (n, {dim}), got {np.shape(X)}")
    return arr


def check_bounds(lower, upper, dim=None):
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if dim is not None:
        lower = np.broadcast_to(lower, (dim,)).copy()
        upper = np.broadcast_to(upper, (dim,)).copy()
    if lower.shape != upper.shape:
        raise ValueError("lower and upper bounds must have the same shape")
    if not np.all(lower < upper):
        raise ValueError("lower bounds must be strictly below upper bounds")
    return lower, upper


class DimensionMismatchError(ValueError):
    """Input length does not match the problem dimension."""
