import numpy as np
import pytest
import scipy.linalg

from sylvnd.errors import SingularMatrix
from sylvnd.kron import dense_solve, kron_product, kron_sum, oracle_apply, oracle_solve
from sylvnd.solver import SylvesterProblem, sylvester_apply
from sylvnd.tensor import NDTensor, vec

from conftest import crandom, ctensor


class TestKronProduct:
    def test_identities(self):
        np.testing.assert_array_equal(kron_product(np.eye(2), np.eye(3)), np.eye(6))

    def test_block_example(self):
        C = np.array([[1, 2], [3, 4]])
        got = kron_product(C, np.eye(2))
        expected = np.array([[1, 0, 2, 0], [0, 1, 0, 2], [3, 0, 4, 0], [0, 3, 0, 4]])
        np.testing.assert_array_equal(got, expected)

    def test_mixed_product(self, rng):
        A, B = crandom(rng, 3, 3), crandom(rng, 2, 2)
        C, D = crandom(rng, 3, 3), crandom(rng, 2, 2)
        lhs = kron_product(A, B) @ kron_product(C, D)
        rhs = kron_product(A @ C, B @ D)
        assert np.abs(lhs - rhs).max() <= 1e-13 * np.abs(rhs).max()

    def test_cap(self):
        with pytest.raises(ValueError):
            kron_product(np.eye(10), np.eye(10), cap=50)


class TestKronSum:
    def test_ordering(self, rng):
        A1, A2 = crandom(rng, 2, 2), crandom(rng, 3, 3)
        expected = np.kron(A2, np.eye(2)) + np.kron(np.eye(3), A1)
        np.testing.assert_array_equal(kron_sum([A1, A2]), expected)

    def test_matches_operator(self, rng):
        dims = (2, 3, 4)
        As = [crandom(rng, n, n) for n in dims]
        X = ctensor(rng, dims)
        got = kron_sum(As) @ vec(X)
        expected = vec(sylvester_apply(As, X))
        assert np.abs(got - expected).max() <= 1e-13 * np.abs(expected).max()
        assert np.abs(vec(oracle_apply(As, X)) - expected).max() <= 1e-13 * np.abs(expected).max()

    def test_exponential_factorizes(self, rng):
        A1, A2 = crandom(rng, 3, 3), crandom(rng, 2, 2)
        t = 0.6
        lhs = scipy.linalg.expm(t * kron_sum([A1, A2]))
        rhs = np.kron(scipy.linalg.expm(t * A2), scipy.linalg.expm(t * A1))
        assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(rhs).max()

    def test_cap(self):
        with pytest.raises(ValueError):
            kron_sum([np.eye(8)] * 3, cap=100)


class TestDenseSolve:
    def test_identity(self, rng):
        b = crandom(rng, 4)
        np.testing.assert_array_equal(dense_solve(np.eye(4), b), b)

    def test_permutation(self):
        P = np.array([[0, 1], [1, 0]])
        np.testing.assert_array_equal(dense_solve(P, [3, 4]), [4, 3])

    def test_random(self, rng):
        A = crandom(rng, 50, 50)
        b = crandom(rng, 50)
        x = dense_solve(A, b)
        assert np.abs(A @ x - b).max() <= 1e-12 * np.abs(A).sum(axis=1).max() * np.abs(x).max()

    def test_singular(self):
        with pytest.raises(SingularMatrix):
            dense_solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            dense_solve(np.eye(3), np.ones(2))


def test_oracle_identity():
    B = NDTensor(np.arange(1, 7).reshape(2, 3))
    X = oracle_solve(SylvesterProblem((np.eye(2), np.eye(3)), B))
    np.testing.assert_allclose(X.array, B.array / 2, rtol=1e-15)
