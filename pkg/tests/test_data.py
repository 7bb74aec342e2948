import numpy as np
import pytest
import scipy.sparse as sp

from isrht.data import (
    Dataset,
    apply_scaler,
    fit_scaler,
    pad_to_pow2,
    parse_libsvm,
    split,
    split_indices,
    write_libsvm,
)
from isrht.errors import DegenerateInputError, ParameterError, ParseError


def write(tmp_path, text, name="d.txt"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestParse:
    def test_single_line(self, tmp_path):
        ds = parse_libsvm(write(tmp_path, "-1 3:4.5 7:1\n+1 1:2\n"))
        assert ds.X.shape == (2, 7)
        np.testing.assert_array_equal(ds.X[0].indices, [2, 6])
        np.testing.assert_array_equal(ds.X[0].data, [4.5, 1.0])
        assert ds.y[0] == -1

    def test_empty_features(self, tmp_path):
        ds = parse_libsvm(write(tmp_path, "+1\n-1 2:1\n"))
        assert ds.X[0].nnz == 0 and ds.y[0] == 1

    @pytest.mark.parametrize("labels,expected", [((0, 1), (-1, 1)), ((1, 2), (-1, 1)), ((-1, 1), (-1, 1))])
    def test_label_encodings(self, tmp_path, labels, expected):
        ds = parse_libsvm(write(tmp_path, f"{labels[0]} 1:1\n{labels[1]} 1:2\n"))
        np.testing.assert_array_equal(ds.y, expected)

    def test_three_labels_rejected(self, tmp_path):
        with pytest.raises(ParseError):
            parse_libsvm(write(tmp_path, "1 1:1\n2 1:1\n3 1:1\n"))

    @pytest.mark.parametrize("line", ["1 3:1 2:1", "1 2:x", "abc 1:1", "1 2", "1 0:1", "1 2:1 2:3"])
    def test_malformed_names_line(self, tmp_path, line):
        with pytest.raises(ParseError, match=r":2:"):
            parse_libsvm(write(tmp_path, f"1 1:1\n{line}\n"))

    def test_pinned_dimension(self, tmp_path):
        ds = parse_libsvm(write(tmp_path, "1 2:1\n-1 1:1\n"), n_features=10)
        assert ds.d == 10
        with pytest.raises(ParseError):
            parse_libsvm(write(tmp_path, "1 12:1\n-1 1:1\n"), n_features=10)

    def test_roundtrip(self, tmp_path, rng):
        X = sp.random(5, 9, density=0.4, random_state=3, format="csr")
        y = np.array([1, -1, 1, 1, -1])
        write_libsvm(tmp_path / "a.txt", X, y)
        ds = parse_libsvm(tmp_path / "a.txt", n_features=9)
        np.testing.assert_array_equal(ds.X.toarray(), X.toarray())
        np.testing.assert_array_equal(ds.y, y)

    def test_sparse_dense_agree(self, mushrooms_path):
        ds = parse_libsvm(mushrooms_path)
        dense = ds.dense().X
        rows, cols = ds.X.nonzero()
        np.testing.assert_array_equal(dense[rows, cols], np.asarray(ds.X[rows, cols]).ravel())
        assert np.count_nonzero(dense) == ds.X.nnz

    def test_mushrooms_shape(self, mushrooms_path):
        ds = parse_libsvm(mushrooms_path)
        assert ds.n == 8124
        assert sorted(np.bincount(ds.y + 1)[[0, 2]].tolist()) == [3916, 4208]


class TestScaler:
    def test_midpoint(self):
        X = np.array([[0.0], [10.0], [5.0]])
        np.testing.assert_allclose(apply_scaler(fit_scaler(X), X).ravel(), [-1, 1, 0])

    def test_constant_feature(self):
        X = np.array([[3.0, 1.0], [3.0, 2.0]])
        out = apply_scaler(fit_scaler(X), np.array([[7.0, 1.5]]))
        assert out[0, 0] == 0

    def test_hand_column(self):
        X = np.array([[-2.0], [0.0], [4.0]])
        np.testing.assert_allclose(apply_scaler(fit_scaler(X), X).ravel(), [-1, -1 / 3, 1])

    def test_clamped(self):
        params = fit_scaler(np.array([[0.0], [1.0]]))
        np.testing.assert_array_equal(apply_scaler(params, np.array([[-5.0], [9.0]])).ravel(), [-1, 1])

    def test_idempotent_refit(self, rng):
        X = rng.uniform(-4, 9, size=(30, 5))
        once = apply_scaler(fit_scaler(X), X)
        twice = apply_scaler(fit_scaler(once), once)
        np.testing.assert_allclose(twice, once, atol=1e-12)

    def test_sparse_keeps_sparsity(self):
        X = sp.csr_matrix(np.array([[0.0, 4.0], [-2.0, 0.0], [1.0, 2.0]]))
        out = apply_scaler(fit_scaler(X), X)
        assert sp.issparse(out) and out.nnz == X.nnz
        assert np.abs(out.data).max() <= 1


class TestSplit:
    def test_proportions(self):
        y = np.array([1] * 60 + [-1] * 40)
        tr, te = split_indices(y, 0.7, seed=0)
        assert (y[tr] == 1).sum() == 42 and (y[tr] == -1).sum() == 28

    def test_deterministic_and_partition(self):
        y = np.array([1, -1] * 25)
        a = split_indices(y, 0.7, seed=5)
        b = split_indices(y, 0.7, seed=5)
        np.testing.assert_array_equal(a[0], b[0])
        assert set(a[0]) | set(a[1]) == set(range(50))
        assert not set(a[0]) & set(a[1])

    def test_tiny_class(self):
        with pytest.raises(DegenerateInputError):
            split_indices(np.array([1, -1, -1, -1]), 0.5, seed=0)

    def test_bad_fraction(self):
        with pytest.raises(ParameterError):
            split_indices(np.array([1, -1] * 3), 1.0, seed=0)

    def test_dataset_split(self):
        ds = Dataset(np.arange(20.0).reshape(10, 2), [1, -1] * 5)
        tr, te = split(ds, 0.6, seed=1)
        assert tr.n + te.n == 10
        np.testing.assert_array_equal(tr.X[:, 0] / 2 % 2, (tr.y == -1).astype(float))


class TestPad:
    @pytest.mark.parametrize("d,d2", [(112, 128), (256, 256), (5000, 8192), (1, 1), (3, 4)])
    def test_widths(self, d, d2):
        assert pad_to_pow2(np.ones((2, d))).shape == (2, d2)

    def test_unchanged_when_power_of_two(self):
        X = np.ones((2, 8))
        assert pad_to_pow2(X) is X

    def test_gram_unchanged(self, rng):
        X = rng.standard_normal((4, 13))
        P = pad_to_pow2(X)
        np.testing.assert_array_equal(P @ P.T, X @ X.T)
        assert np.all(P[:, 13:] == 0)

    def test_sparse(self):
        X = sp.csr_matrix(np.eye(3, 5))
        P = pad_to_pow2(X)
        assert sp.issparse(P) and P.shape == (3, 8)
