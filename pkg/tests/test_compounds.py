from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import additive_fd_oracle, compound_oracle, laplace_det
from kcompound import DomainError
from kcompound.compounds import (
    additive_compound,
    apply_similarity_compound,
    minor,
    multiplicative_compound,
    parallelotope_volume,
)


def test_minor_2x2():
    assert minor([[1, 2], [3, 4]], (1, 2), (1, 2)) == pytest.approx(-2.0)


def test_one_minor_is_entry(rng):
    A = rng.uniform(-1, 1, (4, 4))
    for i in range(1, 5):
        assert minor(A, (i,), (i,)) == A[i - 1, i - 1]


def test_minor_rows_24_cols_12(rng):
    A = rng.uniform(-1, 1, (4, 4))
    expected = laplace_det([[A[1, 0], A[1, 1]], [A[3, 0], A[3, 1]]])
    assert minor(A, (2, 4), (1, 2)) == pytest.approx(expected, abs=1e-14)


def test_minor_errors():
    with pytest.raises(DomainError):
        minor(np.eye(3), (1, 2), (1,))
    with pytest.raises(DomainError):
        minor(np.eye(3), (1, 4), (1, 2))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_multiplicative_matches_cofactor_oracle(rng, n):
    for m in (n - 1, n, n + 1):
        if m < 1:
            continue
        A = rng.uniform(-1, 1, (n, m))
        for k in range(1, min(n, m) + 1):
            np.testing.assert_allclose(multiplicative_compound(A, k), compound_oracle(A, k), atol=1e-12)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_identity_compound(n):
    for k in range(1, n + 1):
        np.testing.assert_array_equal(multiplicative_compound(np.eye(n), k), np.eye(comb(n, k)))
        np.testing.assert_array_equal(additive_compound(np.eye(n), k), k * np.eye(comb(n, k)))


def test_diagonal_2_compound():
    a = np.array([2.0, -3.0, 5.0])
    np.testing.assert_allclose(multiplicative_compound(np.diag(a), 2), np.diag([-6.0, 10.0, -15.0]))


def test_first_and_last_compound(rng):
    A = rng.uniform(-1, 1, (4, 4))
    np.testing.assert_array_equal(multiplicative_compound(A, 1), A)
    assert multiplicative_compound(A, 4).shape == (1, 1)
    assert multiplicative_compound(A, 4)[0, 0] == pytest.approx(np.linalg.det(A), abs=1e-14)
    np.testing.assert_array_equal(additive_compound(A, 1), A)
    assert additive_compound(A, 4)[0, 0] == pytest.approx(np.trace(A), abs=1e-15)


def test_k_out_of_range():
    with pytest.raises(DomainError):
        multiplicative_compound(np.eye(3), 4)
    with pytest.raises(DomainError):
        multiplicative_compound(np.eye(3), 0)
    with pytest.raises(DomainError):
        additive_compound(np.ones((2, 3)), 1)


def test_additive_3x3_layout():
    A = np.arange(1.0, 10.0).reshape(3, 3)
    a = lambda i, j: A[i - 1, j - 1]  # noqa: E731
    expected = np.array([
        [a(1, 1) + a(2, 2), a(2, 3), -a(1, 3)],
        [a(3, 2), a(1, 1) + a(3, 3), a(1, 2)],
        [-a(3, 1), a(2, 1), a(2, 2) + a(3, 3)],
    ])
    np.testing.assert_array_equal(additive_compound(A, 2), expected)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_additive_matches_finite_difference(rng, n):
    A = rng.uniform(-1, 1, (n, n))
    for k in range(1, n + 1):
        np.testing.assert_allclose(additive_compound(A, k), additive_fd_oracle(A, k), atol=1e-6)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_cauchy_binet(rng, n):
    for m, q in [(n, n), (n - 1, n + 1), (n + 1, 2)]:
        A = rng.uniform(-1, 1, (n, m))
        B = rng.uniform(-1, 1, (m, q))
        for k in range(1, min(n, m, q) + 1):
            lhs = multiplicative_compound(A @ B, k)
            rhs = multiplicative_compound(A, k) @ multiplicative_compound(B, k)
            np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sylvester_franke(rng, n):
    A = rng.uniform(-1, 1, (n, n))
    d = np.linalg.det(A)
    for k in range(1, n + 1):
        lhs = np.linalg.det(multiplicative_compound(A, k))
        assert lhs == pytest.approx(d ** comb(n - 1, k - 1), rel=1e-7, abs=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_spectral_identities_symmetric(rng, n):
    X = rng.uniform(-1, 1, (n, n))
    A = X + X.T
    lam = np.linalg.eigvalsh(A)
    for k in range(1, n + 1):
        prods = sorted(np.prod(c) for c in combinations(lam, k))
        sums = sorted(np.sum(c) for c in combinations(lam, k))
        np.testing.assert_allclose(np.linalg.eigvalsh(multiplicative_compound(A, k)), prods, atol=1e-8)
        np.testing.assert_allclose(np.linalg.eigvalsh(additive_compound(A, k)), sums, atol=1e-8)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_trace_identity(rng, n):
    A = rng.uniform(-1, 1, (n, n))
    for k in range(1, n + 1):
        assert np.trace(additive_compound(A, k)) == pytest.approx(comb(n - 1, k - 1) * np.trace(A), abs=1e-12)


def test_transpose_inverse_and_additivity(rng):
    A = rng.uniform(-1, 1, (5, 5)) + 3 * np.eye(5)
    B = rng.uniform(-1, 1, (5, 5))
    for k in range(1, 6):
        np.testing.assert_allclose(multiplicative_compound(A.T, k), multiplicative_compound(A, k).T, rtol=0, atol=1e-13)
        np.testing.assert_allclose(
            np.linalg.inv(multiplicative_compound(A, k)), multiplicative_compound(np.linalg.inv(A), k), rtol=1e-7, atol=1e-12
        )
        np.testing.assert_allclose(
            additive_compound(A + B, k), additive_compound(A, k) + additive_compound(B, k), atol=1e-14
        )


@pytest.mark.parametrize("n", [3, 4, 5])
def test_similarity_transform(rng, n):
    A = rng.uniform(-1, 1, (n, n))
    T = rng.uniform(-1, 1, (n, n)) + 2 * np.eye(n)
    for k in range(1, n + 1):
        Tk = multiplicative_compound(T, k)
        rhs = Tk @ additive_compound(A, k) @ np.linalg.inv(Tk)
        got = apply_similarity_compound(T, A, k)
        np.testing.assert_allclose(got, rhs, rtol=1e-8, atol=1e-10)


def test_similarity_identity_and_diagonal(rng):
    A = rng.uniform(-1, 1, (4, 4))
    np.testing.assert_allclose(apply_similarity_compound(np.eye(4), A, 2), additive_compound(A, 2), atol=1e-15)
    d = np.array([1.0, 2.0, 0.5, 4.0])
    got = apply_similarity_compound(np.diag(d), A, 2)
    Ak = additive_compound(A, 2)
    pairs = list(combinations(range(4), 2))
    for i, a in enumerate(pairs):
        for j, b in enumerate(pairs):
            assert got[i, j] == pytest.approx(Ak[i, j] * np.prod(d[list(a)]) / np.prod(d[list(b)]), abs=1e-14)


def test_similarity_singular_rejected():
    with pytest.raises(DomainError):
        apply_similarity_compound(np.zeros((3, 3)), np.eye(3), 2)


def test_volumes(rng):
    e = np.eye(3)
    assert parallelotope_volume([e[0], e[1]]) == pytest.approx(1.0)
    assert parallelotope_volume([2 * e[0], -3 * e[1], 0.5 * e[2]]) == pytest.approx(3.0)
    V = rng.uniform(-1, 1, (2, 3))
    assert parallelotope_volume(V) == pytest.approx(np.sqrt(np.linalg.det(V @ V.T)), rel=1e-12)
    S = rng.uniform(-1, 1, (4, 4))
    assert parallelotope_volume(S) == pytest.approx(abs(np.linalg.det(S)), rel=1e-12)


def test_volume_dimension_errors():
    with pytest.raises(DomainError):
        parallelotope_volume(np.ones((4, 3)))


square = st.integers(2, 5).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-2, 2, allow_nan=False, width=64))
)


@settings(max_examples=60, deadline=None)
@given(square, st.data())
def test_property_trace_and_linearity(A, data):
    n = A.shape[0]
    k = data.draw(st.integers(1, n))
    c = data.draw(st.floats(-3, 3))
    Ak = additive_compound(A, k)
    assert np.trace(Ak) == pytest.approx(comb(n - 1, k - 1) * np.trace(A), abs=1e-9)
    np.testing.assert_allclose(additive_compound(c * A, k), c * Ak, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(square, st.data())
def test_property_compound_of_product(A, data):
    n = A.shape[0]
    k = data.draw(st.integers(1, n))
    B = data.draw(arrays(np.float64, (n, n), elements=st.floats(-2, 2, width=64)))
    lhs = multiplicative_compound(A @ B, k)
    rhs = multiplicative_compound(A, k) @ multiplicative_compound(B, k)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * max(1.0, np.abs(rhs).max()))
