"""Log norms (matrix measures) for p in {1, 2, inf} and the k-shifted log norm.

``mu(A, p, scaling=H)`` is the log norm induced by ``|x|_H = |H x|_p``,
i.e. ``mu_p(H A H^{-1})``. The k-shifted log norm

    tau_{p,k}(A) = tr(A) + (n - k) * mu_{q,T}(-A),   1/p + 1/q = 1,

bounds ``mu_{p,T^(k)}(A^[k])`` from above without forming any compound.
"""

import math
from dataclasses import dataclass
from itertools import combinations, islice
from typing import Optional

import numpy as np

from ._validation import DomainError, as_square, check_invertible, check_k, check_n
from .compounds import additive_compound, multiplicative_compound

__all__ = [
    "LogNormSpec",
    "TauSpec",
    "normalize_p",
    "dual_exponent",
    "mu",
    "induced_norm",
    "mu_compound_direct",
    "tau",
    "tau_upper_bounds_mu",
    "normalized_mu_monotone",
]

_BATCH = 4096


def normalize_p(p):
    """Map user spellings of 1, 2 and infinity onto ``1``, ``2`` or ``math.inf``."""
    if isinstance(p, str):
        key = p.strip().lower()
        if key in ("inf", "infinity", "∞"):
            return math.inf
        try:
            p = float(key)
        except ValueError:
            raise DomainError(f"unsupported norm exponent {p!r}") from None
    if p == 1:
        return 1
    if p == 2:
        return 2
    if p == math.inf:
        return math.inf
    raise DomainError(f"unsupported norm exponent {p!r}; expected 1, 2 or inf")


def dual_exponent(p):
    """The q with ``1/p + 1/q = 1``: 1 <-> inf, 2 <-> 2."""
    p = normalize_p(p)
    return {1: math.inf, 2: 2, math.inf: 1}[p]


def _scaled(A, scaling):
    if scaling is None:
        return A
    H = check_invertible(scaling, "scaling")
    if H.shape != A.shape:
        raise DomainError(f"scaling {H.shape} does not match matrix {A.shape}")
    return H @ A @ np.linalg.inv(H)


def _mu_unscaled(A, p):
    if p == 2:
        return float(np.linalg.eigvalsh(0.5 * (A + A.T))[-1])
    if p == 1:
        A = A.T
    off = np.abs(A)
    np.fill_diagonal(off, 0.0)
    return float(np.max(np.diagonal(A) + off.sum(axis=1)))


def mu(A, p=2, scaling=None):
    """Log norm of `A` induced by the (optionally scaled) L_p norm.

    Parameters
    ----------
    A : array_like, shape (n, n)
    p : {1, 2, inf}
    scaling : array_like, shape (n, n), optional
        Invertible weight ``H``; the result is ``mu_p(H A H^{-1})``.

    Examples
    --------
    >>> mu([[-1.0, 2.0], [0.0, -3.0]], 1), mu([[-1.0, 2.0], [0.0, -3.0]], "inf")
    (-1.0, 1.0)
    """
    p = normalize_p(p)
    A = as_square(A)
    return _mu_unscaled(_scaled(A, scaling), p)


def induced_norm(A, p=2, scaling=None):
    """Induced matrix norm ``||H A H^{-1}||_p``."""
    p = normalize_p(p)
    A = _scaled(as_square(A), scaling)
    return float(np.linalg.norm(A, {1: 1, 2: 2, math.inf: np.inf}[p]))


def _max_over_subsets(A, k):
    """``max over alpha of sum_{i in alpha} (a_ii + sum_{j not in alpha} |a_ij|)``.

    Streams Q(k, n) in batches instead of building the compound.
    """
    n = A.shape[0]
    off = np.abs(A)
    np.fill_diagonal(off, 0.0)
    d = np.diagonal(A)
    best = -math.inf
    combos = combinations(range(n), k)
    while True:
        chunk = list(islice(combos, _BATCH))
        if not chunk:
            break
        mask = np.zeros((len(chunk), n))
        mask[np.repeat(np.arange(len(chunk)), k), np.array(chunk).ravel()] = 1.0
        vals = mask @ d + np.einsum("bi,ij,bj->b", mask, off, 1.0 - mask)
        best = max(best, float(vals.max()))
    return best


def mu_compound_direct(A, k, p=2):
    """``mu_p(A^[k])`` evaluated from the entries of `A` alone.

    For p = 2 this is the sum of the k largest eigenvalues of the symmetric
    part. For p in {1, inf} it is a maximum over Q(k, n) of column (p = 1) or
    row (p = inf) sums restricted to the complement of each index set.
    """
    p = normalize_p(p)
    A = as_square(A)
    n = check_n(A.shape[0])
    k = check_k(k, n)
    if k == n:
        return float(np.trace(A))
    if p == 2:
        lam = np.linalg.eigvalsh(0.5 * (A + A.T))
        return float(lam[::-1][:k].sum())
    return _max_over_subsets(A.T if p == 1 else A, k)


def tau(A, k, p=2, T=None):
    """The k-shifted log norm ``tr(A) + (n - k) mu_{q,T}(-A)``.

    >>> tau(np.eye(4), 2, 1)
    2.0
    """
    A = as_square(A)
    n = A.shape[0]
    k = check_k(k, n)
    q = dual_exponent(p)
    return float(np.trace(A) + (n - k) * mu(-A, q, scaling=T))


def tau_upper_bounds_mu(A, k, p=2, T=None):
    """Return ``(mu_{p,T^(k)}(A^[k]), tau_{p,k}(A))``; the first never exceeds the second."""
    A = as_square(A)
    n = A.shape[0]
    k = check_k(k, n)
    Tk = None if T is None else multiplicative_compound(check_invertible(T), k)
    mu_val = mu(additive_compound(A, k), p, scaling=Tk)
    return mu_val, tau(A, k, p, T)


def normalized_mu_monotone(A, p=2, T=None):
    """``[mu_{p,T^(k)}(A^[k]) / k for k in 1..n]``, a non-increasing sequence."""
    A = as_square(A)
    n = A.shape[0]
    if T is None:
        return [mu_compound_direct(A, k, p) / k for k in range(1, n + 1)]
    # mu_{p,T^(k)}(A^[k]) == mu_p((T A T^-1)^[k])
    B = _scaled(A, T)
    return [mu_compound_direct(B, k, p) / k for k in range(1, n + 1)]


@dataclass(frozen=True)
class LogNormSpec:
    """A log norm choice: exponent ``p`` and an optional weight matrix."""

    p: object = 2
    scaling: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "p", normalize_p(self.p))
        if self.scaling is not None:
            object.__setattr__(self, "scaling", check_invertible(self.scaling, "scaling"))

    @property
    def q(self):
        return dual_exponent(self.p)

    def __call__(self, A):
        return mu(A, self.p, self.scaling)


@dataclass(frozen=True)
class TauSpec:
    """Parameters of ``tau_{p,k}``: order ``k``, exponent ``p``, scaling ``T``."""

    k: int
    p: object = 2
    T: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "p", normalize_p(self.p))
        if self.T is not None:
            object.__setattr__(self, "T", check_invertible(self.T, "T"))
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k!r}")

    def __call__(self, A):
        return tau(A, self.k, self.p, self.T)
