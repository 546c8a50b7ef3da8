import itertools
import math

import numpy as np
import pytest

from fpresheaf import linalg as la

from conftest import brute_rank, brute_subspaces


def test_rref_identity_and_zero():
    R, r = la.rref(la.identity(3), 2)
    assert r == 3 and np.array_equal(R, la.identity(3))
    R, r = la.rref(la.zeros(2, 4), 2)
    assert r == 0 and not R.any()


def test_rref_hand_example():
    R, r = la.rref(np.array([[1, 1], [1, 1]]), 2)
    assert r == 1
    assert R.tolist() == [[1, 1], [0, 0]]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_rank_against_span_count(p):
    rng = np.random.default_rng(p)
    for _ in range(30):
        M = rng.integers(0, p, size=(rng.integers(1, 4), rng.integers(1, 4)))
        assert la.rank(M, p) == brute_rank(M, p)


def test_gf2_packed_matches_generic():
    rng = np.random.default_rng(7)
    for _ in range(20):
        M = rng.integers(0, 2, size=(rng.integers(1, 40), rng.integers(1, 130)))
        R1, r1 = la._rref_gf2(M.copy())
        R2, r2 = la._rref_modp(M.copy(), 2)
        assert r1 == r2 and np.array_equal(R1, R2)


def test_kernel_examples():
    assert la.kernel_basis(la.identity(3), 2).shape[0] == 0
    K = la.kernel_basis(la.zeros(2, 3), 2)
    assert K.shape[0] == 3
    assert la.kernel_basis(np.array([[1, 1]]), 2).tolist() == [[1, 1]]


def test_solve_and_inverse():
    A = np.array([[1, 2], [3, 4]])
    Ai = la.inverse(A, 5)
    assert np.array_equal(la.matmul(A, Ai, 5), la.identity(2))
    x = la.solve(A, np.array([1, 0]), 5)
    assert la.matmul(A, x.reshape(-1, 1), 5).reshape(-1).tolist() == [1, 0]
    assert la.solve(np.array([[1, 1], [1, 1]]), np.array([0, 1]), 2) is None
    with pytest.raises(ValueError):
        la.solve(A, np.array([1, 0, 0]), 5)
    with pytest.raises(ValueError):
        la.inverse(np.array([[1, 1], [1, 1]]), 2)


def test_hom_enumeration():
    assert la.enumerate_hom(0, 3, 2).shape == (1, 3, 0)
    assert la.enumerate_hom(1, 1, 2).tolist() == [[[0]], [[1]]]
    H = la.enumerate_hom(2, 2, 2)
    assert len(H) == 16
    assert not H[0].any() and H[-1].tolist() == [[1, 1], [1, 1]]
    assert [la.hom_index(M, 2) for M in H] == list(range(16))
    assert la.hom_indices(H, 2).tolist() == list(range(16))


def test_hom_enumeration_cap():
    with pytest.raises(la.CapExceeded):
        la.enumerate_hom(3, 3, 2, cap=100)


def test_surjections():
    assert len(la.enumerate_surjections(2, 2, 2)) == (4 - 1) * (4 - 2)
    assert len(la.enumerate_surjections(1, 2, 2)) == 0
    assert len(la.enumerate_surjections(3, 1, 2)) == 7
    assert la.surjection_count(3, 1, 2) == 7


@pytest.mark.parametrize("p,m", [(2, 4), (3, 3), (2, 3)])
def test_gaussian_binomial_against_brute_force(p, m):
    spaces = brute_subspaces(m, p)
    for k in range(m + 1):
        count = sum(1 for S in spaces if len(S) == p**k)
        assert la.gaussian_binomial(m, k, p) == count
        assert len(la.enumerate_rref(k, m, p)) == count


def test_gaussian_examples():
    assert la.gaussian_binomial(4, 2, 2) == 35
    assert la.gaussian_binomial(5, 0, 2) == 1
    assert la.gaussian_binomial(3, 1, 2) == 7


def test_subspace_quotient_and_lift():
    S = la.Subspace.span(np.array([[1, 1, 0]]), 3, 2)
    Q = S.quotient_matrix()
    assert Q.shape == (2, 3)
    assert not la.matmul(Q, S.basis.T, 2).any()
    L = S.lift_matrix()
    assert np.array_equal(la.matmul(Q, L, 2), la.identity(2))


def test_subspace_join_dimension():
    A = la.Subspace.span(np.array([[1, 0, 0], [0, 1, 0]]), 3, 2)
    B = la.Subspace.span(np.array([[0, 1, 0], [0, 0, 1]]), 3, 2)
    assert A.join(B.basis).dim == 3
    assert A.contains(np.array([[1, 1, 0]]))
    assert not A.contains(np.array([[0, 0, 1]]))


def test_zero_ambient_subspace():
    S = la.Subspace.span(la.zeros(0, 0), 0, 2)
    assert S.dim == 0
    assert S.quotient_matrix().shape == (0, 0)


def test_unsupported_prime():
    with pytest.raises(ValueError):
        la.check_prime(7)


def test_vectors_little_endian():
    V = la.all_vectors(3, 2)
    assert V.shape == (8, 3)
    assert V[6].tolist() == [0, 1, 1]
    assert la.vector_indices(V, 2).tolist() == list(range(8))
