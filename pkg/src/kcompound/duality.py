"""The signed anti-diagonal matrix U(k, n) and the compound duality identities.

``U(k, n)`` is stored as its anti-diagonal sign vector; conjugation
``U^T B U`` is a reversal of rows and columns followed by an outer sign
product, never a matrix product.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from ._validation import DomainError, as_square, check_k, check_n
from .compounds import additive_compound, multiplicative_compound
from .lexidx import generate_sequences, signature
from .lognorms import mu, normalize_p

__all__ = [
    "DualityMatrix",
    "build_U",
    "conjugate_by_U",
    "kth_adjugate",
    "additive_duality_residual",
    "commutation_residual",
    "exp_compound_via_duality",
    "mu_duality_equality",
    "multiplicative_duality_residual",
]


@dataclass(frozen=True)
class DualityMatrix:
    """U(k, n): ``u[i, j] = signs[j]`` when ``i + j = r - 1`` (0-based), else 0."""

    k: int
    n: int
    signs: tuple

    @property
    def r(self):
        return len(self.signs)

    def toarray(self):
        r = self.r
        U = np.zeros((r, r))
        j = np.arange(r)
        U[r - 1 - j, j] = self.signs
        return U

    def __array__(self, dtype=None, copy=None):
        U = self.toarray()
        return U if dtype is None else U.astype(dtype)


def build_U(k, n):
    """Construct U(k, n) for ``1 <= k <= n - 1``.

    >>> build_U(2, 3).toarray()
    array([[ 0.,  0., -1.],
           [ 0.,  1.,  0.],
           [-1.,  0.,  0.]])
    """
    n = check_n(n)
    if n < 2:
        raise DomainError("U(k, n) needs n >= 2")
    k = check_k(k, n, high=n - 1)
    table = generate_sequences(k, n)
    return DualityMatrix(k, n, tuple(signature(a) for a in table.seqs))


def conjugate_by_U(U, B):
    """``U^T B U`` via ``(U^T B U)[i, j] = s_i s_j B[r-1-i, r-1-j]``."""
    B = as_square(B, "B")
    if B.shape[0] != U.r:
        raise DomainError(f"B is {B.shape[0]}x{B.shape[0]} but U is {U.r}x{U.r}")
    s = np.asarray(U.signs, dtype=float)
    return np.outer(s, s) * B[::-1, ::-1]


def _dual_args(A, k):
    A = as_square(A)
    n = A.shape[0]
    U = build_U(k, n)
    return A, n, U.k, U


def kth_adjugate(A, k):
    """``U^T A^(n-k) U``, which satisfies ``(A^(k))^T X = det(A) I``.

    For ``k = 1`` this is the classical adjugate of ``A^T``, i.e. the
    transpose of ``adj(A)``.
    """
    A, n, k, U = _dual_args(A, k)
    return conjugate_by_U(U, multiplicative_compound(A, n - k))


def multiplicative_duality_residual(A, k):
    """``max|(A^(k))^T U^T A^(n-k) U - det(A) I|``."""
    A, n, k, U = _dual_args(A, k)
    Z = multiplicative_compound(A, k).T @ kth_adjugate(A, k)
    return float(np.max(np.abs(Z - np.linalg.det(A) * np.eye(U.r))))


def additive_duality_residual(A, k):
    """``max|(A^[k])^T + U^T A^[n-k] U - tr(A) I|``; zero in exact arithmetic."""
    A, n, k, U = _dual_args(A, k)
    lhs = additive_compound(A, k).T + conjugate_by_U(U, additive_compound(A, n - k))
    return float(np.max(np.abs(lhs - np.trace(A) * np.eye(U.r))))


def commutation_residual(A, k):
    """Infinity-norm of the commutator of ``(A^[k])^T`` and ``U^T A^[n-k] U``."""
    A, n, k, U = _dual_args(A, k)
    X = additive_compound(A, k).T
    Y = conjugate_by_U(U, additive_compound(A, n - k))
    return float(np.linalg.norm(X @ Y - Y @ X, np.inf))


def exp_compound_via_duality(A, k):
    """``exp(tr A) U^T (exp(-A))^(n-k) U``, equal to ``((exp A)^(k))^T``."""
    A, n, k, U = _dual_args(A, k)
    return np.exp(np.trace(A)) * conjugate_by_U(U, multiplicative_compound(expm(-A), n - k))


def mu_duality_equality(A, k, p=2):
    """Both sides of ``mu_p(A^[k]) = tr(A) + mu_{p,U^T}(-(A^[n-k])^T)``.

    Returns
    -------
    (lhs, rhs) : tuple of float
    """
    p = normalize_p(p)
    A, n, k, U = _dual_args(A, k)
    lhs = mu(additive_compound(A, k), p)
    # scaling by U^T: mu(U^T M U)
    rhs = np.trace(A) + mu(conjugate_by_U(U, -additive_compound(A, n - k).T), p)
    return float(lhs), float(rhs)

