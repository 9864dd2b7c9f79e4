"""Input validation helpers shared by the samplers, factorizations and norms."""

import numbers

import numpy as np


class DimensionError(ValueError):
    """Raised when matrix dimensions are inconsistent (e.g. ``k > n``)."""


class RankDeficiencyError(ValueError):
    """Raised when a factorization meets a (numerically) rank-deficient input."""


def check_positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return int(value)


def check_dim_pair(k, n):
    """Validate ``1 <= k <= n`` and return them as Python ints."""
    k = check_positive_int(k, "k")
    n = check_positive_int(n, "n")
    if k > n:
        raise DimensionError(f"k={k} exceeds n={n}")
    return k, n


def check_matrix(M, name="M", ndim=2):
    """Return ``M`` as a finite float64 array of the given rank."""
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def check_square(M, name="M"):
    arr = check_matrix(M, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_orthonormal_columns(Q, atol=1e-10):
    """Raise unless ``max |Q^T Q - I| <= atol``."""
    dev = np.max(np.abs(Q.T @ Q - np.eye(Q.shape[1])))
    if dev > atol:
        raise ValueError(f"columns are not orthonormal: max |Q^T Q - I| = {dev:.3e}")
    return Q
