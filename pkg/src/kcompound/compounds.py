"""Minors, multiplicative and additive compounds, parallelotope volumes.

All matrices are real ``numpy`` arrays. Compounds are indexed by Q(k, n) in
lexicographic order (see :mod:`kcompound.lexidx`), so entry ``(i, j)`` of
``multiplicative_compound(A, k)`` is the minor on rows ``Q(k, n)[i]`` and
columns ``Q(k, m)[j]``.
"""

from functools import lru_cache

import numpy as np

from ._validation import (
    DomainError,
    as_matrix,
    as_square,
    check_compound_size,
    check_invertible,
    check_k,
)
from .lexidx import generate_sequences, validate_sequence

__all__ = [
    "minor",
    "multiplicative_compound",
    "additive_compound",
    "parallelotope_volume",
    "apply_similarity_compound",
]


def _det_stack(S):
    """Determinants of a stack of ``k x k`` matrices (last two axes)."""
    k = S.shape[-1]
    if k == 1:
        return S[..., 0, 0].copy()
    if k == 2:
        return S[..., 0, 0] * S[..., 1, 1] - S[..., 0, 1] * S[..., 1, 0]
    if k == 3:
        return (
            S[..., 0, 0] * (S[..., 1, 1] * S[..., 2, 2] - S[..., 1, 2] * S[..., 2, 1])
            - S[..., 0, 1] * (S[..., 1, 0] * S[..., 2, 2] - S[..., 1, 2] * S[..., 2, 0])
            + S[..., 0, 2] * (S[..., 1, 0] * S[..., 2, 1] - S[..., 1, 1] * S[..., 2, 0])
        )
    # LAPACK getrf: LU with partial pivoting
    return np.linalg.det(S)


def minor(A, alpha, beta):
    """Determinant of the submatrix of `A` on rows `alpha`, columns `beta` (1-based).

    >>> minor([[1.0, 2.0], [3.0, 4.0]], (1, 2), (1, 2))
    -2.0
    """
    A = as_matrix(A)
    alpha = validate_sequence(alpha, A.shape[0])
    beta = validate_sequence(beta, A.shape[1])
    if len(alpha) != len(beta):
        raise DomainError(f"row and column sequences differ in length: {alpha!r}, {beta!r}")
    sub = A[np.ix_(np.array(alpha) - 1, np.array(beta) - 1)]
    return float(_det_stack(sub))


def multiplicative_compound(A, k):
    """The k-multiplicative compound of `A`: all k-minors in lexicographic order.

    Parameters
    ----------
    A : array_like, shape (n, m)
    k : int
        ``1 <= k <= min(n, m)``.

    Returns
    -------
    ndarray, shape (C(n, k), C(m, k))
    """
    A = as_matrix(A)
    n, m = A.shape
    k = check_k(k, min(n, m))
    check_compound_size(n, k)
    check_compound_size(m, k)
    rows = generate_sequences(k, n).zero_based()
    cols = generate_sequences(k, m).zero_based()
    # (r, c, k, k) stack of submatrices
    sub = A[rows[:, None, :, None], cols[None, :, None, :]]
    return _det_stack(sub)


@lru_cache(maxsize=128)
def _additive_pattern(k, n):
    """Sparsity pattern of the k-additive compound of an n x n matrix.

    Returns ``(diag_idx, rows, cols, src_row, src_col, sign)`` where
    ``diag_idx`` is an ``(r, k)`` array of 0-based diagonal sources and the
    remaining arrays list the off-diagonal nonzeros.
    """
    table = generate_sequences(k, n)
    rows, cols, src_row, src_col, sign = [], [], [], [], []
    for a_pos, alpha in enumerate(table.seqs):
        members = set(alpha)
        outside = [j for j in range(1, n + 1) if j not in members]
        for ell, i_ell in enumerate(alpha, start=1):
            rest = alpha[: ell - 1] + alpha[ell:]
            for j in outside:
                beta = tuple(sorted(rest + (j,)))
                m = beta.index(j) + 1
                rows.append(a_pos)
                cols.append(table.index_of(beta))
                src_row.append(i_ell - 1)
                src_col.append(j - 1)
                sign.append(-1.0 if (ell + m) % 2 else 1.0)
    as_idx = lambda v: np.array(v, dtype=np.intp)  # noqa: E731
    return (
        table.zero_based(),
        as_idx(rows),
        as_idx(cols),
        as_idx(src_row),
        as_idx(src_col),
        np.array(sign),
    )


def additive_compound(A, k):
    """The k-additive compound of a square matrix, built entrywise.

    Diagonal entry for ``alpha`` is ``sum(a[i, i] for i in alpha)``. When
    ``alpha`` and ``beta`` differ in exactly one index, ``i_l`` in ``alpha``
    at position ``l`` against ``j_m`` in ``beta`` at position ``m``, the
    entry is ``(-1)**(l + m) * a[i_l, j_m]``. All other entries vanish.

    >>> additive_compound(np.diag([1.0, 2.0, 3.0]), 2)
    array([[3., 0., 0.],
           [0., 4., 0.],
           [0., 0., 5.]])
    """
    A = as_square(A)
    n = A.shape[0]
    k = check_k(k, n)
    r = check_compound_size(n, k)
    diag_idx, rows, cols, src_row, src_col, sign = _additive_pattern(k, n)
    out = np.zeros((r, r))
    d = np.diagonal(A)
    out[np.arange(r), np.arange(r)] = d[diag_idx].sum(axis=1)
    # adding 0.0 turns the -0.0 of a sign flip on a zero entry into +0.0
    out[rows, cols] = sign * A[src_row, src_col] + 0.0
    return out


def parallelotope_volume(vectors):
    """Volume of the parallelotope spanned by ``k`` vectors in R^n.

    `vectors` is a sequence of ``k`` vectors of length ``n`` (or a ``(k, n)``
    array). The volume is the Euclidean norm of the k-compound of the
    ``n x k`` matrix whose columns are the vectors.
    """
    V = np.asarray(vectors, dtype=float)
    if V.ndim != 2:
        raise DomainError("vectors must form a 2-D array of shape (k, n)")
    k, n = V.shape
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n vectors, got k={k}, n={n}")
    X = multiplicative_compound(V.T, k)
    return float(np.linalg.norm(X[:, 0]))


def apply_similarity_compound(T, A, k):
    """Return the k-additive compound of ``T A T^{-1}``.

    Equals ``T^(k) A^[k] (T^(k))^{-1}``; the left side is what gets computed.
    """
    T = check_invertible(T, "T")
    A = as_square(A)
    if T.shape != A.shape:
        raise DomainError(f"T {T.shape} and A {A.shape} differ in size")
    return additive_compound(T @ A @ np.linalg.inv(T), k)
