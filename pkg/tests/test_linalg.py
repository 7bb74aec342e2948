import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from isrht.errors import DimensionError
from isrht.linalg import (
    check_sparse,
    column_sq_norms,
    fwht,
    fwht_in_place,
    hadamard_normalized,
    next_power_of_two,
    random_signs,
    rotate,
)


def naive_hadamard(d):
    """Entry (i, j) of the Sylvester matrix is (-1)^popcount(i & j)."""
    idx = np.arange(d)
    parity = np.array([[bin(i & j).count("1") % 2 for j in idx] for i in idx])
    return np.where(parity == 0, 1.0, -1.0) / math.sqrt(d)


class TestFwht:
    def test_two_point(self):
        np.testing.assert_allclose(fwht([1.0, 1.0]), [math.sqrt(2), 0.0], atol=1e-15)

    def test_impulse_is_first_column(self):
        np.testing.assert_allclose(fwht([1.0, 0, 0, 0]), [0.5] * 4, atol=1e-15)

    def test_d8_against_recursive_matrix(self, rng):
        v = rng.standard_normal(8)
        np.testing.assert_allclose(fwht(v), hadamard_normalized(8) @ v, atol=1e-12)

    @pytest.mark.parametrize("d", [2, 4, 8, 16, 32, 64])
    def test_matches_naive_multiply(self, rng, d):
        H = naive_hadamard(d)
        np.testing.assert_allclose(hadamard_normalized(d), H, atol=1e-15)
        for _ in range(5):
            v = rng.standard_normal(d)
            np.testing.assert_allclose(fwht(v), H @ v, atol=1e-12)

    def test_in_place(self):
        v = np.array([1.0, 2.0, 3.0, 4.0])
        out = fwht_in_place(v)
        assert out is v
        np.testing.assert_allclose(v, [5.0, -1.0, -2.0, 0.0])

    @pytest.mark.parametrize("d", [3, 6, 12, 100])
    def test_rejects_non_power_of_two(self, d):
        with pytest.raises(DimensionError):
            fwht(np.ones(d))

    @settings(max_examples=40, deadline=None)
    @given(q=st.integers(1, 10), seed=st.integers(0, 2**32 - 1))
    def test_involution_and_isometry(self, q, seed):
        v = np.random.default_rng(seed).standard_normal(2**q)
        once = fwht(v)
        np.testing.assert_allclose(np.linalg.norm(once), np.linalg.norm(v), rtol=1e-10)
        np.testing.assert_allclose(fwht(once), v, atol=1e-10)


def test_next_power_of_two():
    assert [next_power_of_two(d) for d in (1, 2, 3, 112, 128, 5000)] == [1, 2, 4, 128, 128, 8192]


class TestRotate:
    def test_zero_matrix(self):
        signs = np.ones(8)
        assert np.all(rotate(np.zeros((3, 8)), signs) == 0)

    def test_two_columns_plus_signs(self):
        a, b = 0.7, -2.5
        out = rotate(np.array([[a, b]]), np.ones(2))
        np.testing.assert_allclose(out, [[(a + b) / math.sqrt(2), (a - b) / math.sqrt(2)]])

    def test_rows_are_fwht_of_signed_rows(self, rng):
        X = rng.standard_normal((5, 16))
        s = random_signs(16, rng)
        out = rotate(X, s)
        for i in range(5):
            np.testing.assert_allclose(out[i], fwht(s * X[i]), atol=1e-14)
        # input untouched
        assert not np.shares_memory(out, X)

    def test_gram_preserved(self, rng):
        X = rng.standard_normal((4, 8))
        Xr = rotate(X, random_signs(8, rng))
        assert np.linalg.norm(Xr @ Xr.T - X @ X.T) < 1e-10

    def test_sparse_input(self, rng):
        X = sp.random(6, 32, density=0.2, random_state=1, format="csr")
        s = random_signs(32, rng)
        np.testing.assert_allclose(rotate(X, s), rotate(X.toarray(), s))

    def test_rejects_unpadded(self):
        with pytest.raises(DimensionError):
            rotate(np.ones((2, 6)), np.ones(6))

    def test_sign_diagonal_is_involution(self, rng):
        s = random_signs(64, rng)
        v = rng.standard_normal(64)
        np.testing.assert_array_equal(s * (s * v), v)
        assert set(np.unique(s)) <= {-1.0, 1.0}

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), q=st.integers(1, 8))
    def test_inner_products_preserved(self, seed, q):
        g = np.random.default_rng(seed)
        X = g.standard_normal((6, 2**q))
        Xr = rotate(X, random_signs(2**q, g))
        G = X @ X.T
        np.testing.assert_allclose(Xr @ Xr.T, G, atol=1e-10 * max(1.0, np.abs(G).max()))


class TestColumnNorms:
    def test_hand_example(self):
        np.testing.assert_array_equal(column_sq_norms(np.array([[1.0, 2.0], [3.0, 0.0]])), [10.0, 4.0])

    def test_zero(self):
        assert np.all(column_sq_norms(np.zeros((3, 5))) == 0)

    def test_against_loop(self, rng):
        X = rng.standard_normal((16, 32))
        expected = [sum(X[i, j] ** 2 for i in range(16)) for j in range(32)]
        np.testing.assert_allclose(column_sq_norms(X), expected, atol=1e-12)
        np.testing.assert_allclose(column_sq_norms(sp.csr_matrix(X)), expected, atol=1e-12)


class TestSparseChecks:
    def test_valid(self):
        check_sparse(sp.csr_matrix(np.array([[0, 1.0, 2.0], [3.0, 0, 0]])))

    def test_unsorted_indices_rejected(self):
        X = sp.csr_matrix((np.array([1.0, 2.0]), np.array([2, 0]), np.array([0, 2])), shape=(1, 3))
        with pytest.raises(ValueError, match="increasing"):
            check_sparse(X)

    def test_index_out_of_range(self):
        X = sp.csr_matrix((np.array([1.0]), np.array([0]), np.array([0, 1])), shape=(1, 3))
        X.indices[0] = 5
        with pytest.raises(ValueError, match="range"):
            check_sparse(X)
