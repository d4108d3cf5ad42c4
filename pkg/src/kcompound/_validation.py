"""Input checking shared by the public functions."""

import math

import numpy as np

#: Largest universe size accepted for index sets and compounds.
MAX_N = 30
#: Largest compound dimension C(n, k) that is materialised densely.
MAX_COMPOUND_DIM = 10**6


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


def as_matrix(A, name="A"):
    """Return `A` as a finite 2-D float64 array."""
    arr = np.asarray(A, dtype=float)
    if arr.ndim != 2:
        raise DomainError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def as_square(A, name="A"):
    arr = as_matrix(A, name)
    if arr.shape[0] != arr.shape[1]:
        raise DomainError(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_k(k, n, *, low=1, high=None):
    """Validate an integer order ``low <= k <= high`` (``high`` defaults to n)."""
    high = n if high is None else high
    if isinstance(k, bool) or int(k) != k:
        raise DomainError(f"k must be an integer, got {k!r}")
    k = int(k)
    if not low <= k <= high:
        raise DomainError(f"k={k} outside [{low}, {high}] for n={n}")
    return k


def check_n(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if n > MAX_N:
        raise DomainError(f"n={n} exceeds the supported maximum {MAX_N}")
    return int(n)


def check_compound_size(n, k):
    r = math.comb(n, k)
    if r > MAX_COMPOUND_DIM:
        raise DomainError(f"C({n},{k})={r} is too large to form densely")
    return r


def check_invertible(T, name="T"):
    """Return `T` as a square array, rejecting numerically singular input."""
    T = as_square(T, name)
    cond = np.linalg.cond(T)
    if not np.isfinite(cond) or cond > 1e14:
        raise DomainError(f"{name} is singular or too ill-conditioned (cond={cond:.3g})")
    return T
