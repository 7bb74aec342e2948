"""Matrix containers and the fast Walsh-Hadamard transform.

Dense matrices are plain ``float64`` numpy arrays (row-major, C order) and
sparse matrices are ``scipy.sparse.csr_matrix``.  The transforms here work
row-wise, so each sample's rotation is one contiguous pass.
"""

from __future__ import annotations

import math

import numba
import numpy as np
import scipy.sparse as sp

from .errors import DimensionError


def is_power_of_two(d: int) -> bool:
    return d >= 1 and (d & (d - 1)) == 0


def next_power_of_two(d: int) -> int:
    """Smallest power of two >= d (1 for d <= 1)."""
    if d <= 1:
        return 1
    return 1 << (int(d) - 1).bit_length()


@numba.njit(cache=True, nogil=True)
def _fwht_1d(v):
    d = v.shape[0]
    h = 1
    while h < d:
        for start in range(0, d, 2 * h):
            for j in range(start, start + h):
                a = v[j]
                b = v[j + h]
                v[j] = a + b
                v[j + h] = a - b
        h *= 2
    scale = 1.0 / math.sqrt(d)
    for j in range(d):
        v[j] *= scale


@numba.njit(cache=True, nogil=True)
def _rotate_rows(X, signs):
    n, d = X.shape
    for i in range(n):
        row = X[i]
        for j in range(d):
            row[j] *= signs[j]
        _fwht_1d(row)


def fwht_in_place(v: np.ndarray) -> np.ndarray:
    """Normalized Walsh-Hadamard transform of ``v``, computed in place.

    The result is ``H_d @ v / sqrt(d)`` where ``H_d`` is the Sylvester
    Hadamard matrix.  Uses the iterative stride-doubling butterfly, so the
    cost is O(d log d) with O(1) extra memory.  ``v`` must be a contiguous
    float64 vector whose length is a power of two; it is returned for
    convenience.
    """
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-d array, got shape {v.shape}")
    if not is_power_of_two(v.shape[0]):
        raise DimensionError(f"length {v.shape[0]} is not a power of two")
    if v.dtype != np.float64 or not v.flags.c_contiguous:
        raise TypeError("fwht_in_place needs a contiguous float64 array")
    _fwht_1d(v)
    return v


def fwht(v) -> np.ndarray:
    """Out-of-place variant of :func:`fwht_in_place`."""
    out = np.array(v, dtype=np.float64, copy=True).ravel()
    return fwht_in_place(out)


def hadamard_normalized(d: int) -> np.ndarray:
    """Explicit normalized Hadamard matrix built by the recursive doubling.

    Only meant for small ``d`` (oracles and tests).
    """
    if not is_power_of_two(d):
        raise DimensionError(f"{d} is not a power of two")
    H = np.ones((1, 1))
    while H.shape[0] < d:
        H = np.block([[H, H], [H, -H]])
    return H / math.sqrt(d)


def random_signs(d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a sign diagonal: independent +1/-1 entries with probability 1/2."""
    return rng.choice(np.array([-1.0, 1.0]), size=d)


def rotate(X, signs: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Compute ``X @ diag(signs) @ H`` one row at a time.

    ``X`` may be dense or sparse; the result is always a dense n x d array.
    When ``out`` is given it must be a C-contiguous float64 n x d array and
    is overwritten.
    """
    signs = np.asarray(signs, dtype=np.float64)
    n, d = X.shape
    if not is_power_of_two(d):
        raise DimensionError(f"rotation needs a power-of-two width, got {d} (pad first)")
    if signs.shape != (d,):
        raise DimensionError(f"sign diagonal has length {signs.shape[0]}, expected {d}")
    if out is None:
        out = to_dense(X, copy=True)
    else:
        if out.shape != (n, d) or out.dtype != np.float64 or not out.flags.c_contiguous:
            raise DimensionError("out must be a contiguous float64 array of the input's shape")
        out[...] = to_dense(X)
    _rotate_rows(out, signs)
    return out


def column_sq_norms(X) -> np.ndarray:
    """Squared Euclidean norm of every column."""
    if sp.issparse(X):
        Xc = X.tocsr()
        return np.bincount(Xc.indices, weights=Xc.data**2, minlength=X.shape[1]).astype(np.float64)
    X = np.asarray(X, dtype=np.float64)
    return np.einsum("ij,ij->j", X, X)


def to_dense(X, copy: bool = False) -> np.ndarray:
    """Return ``X`` as a C-contiguous float64 array."""
    if sp.issparse(X):
        return np.ascontiguousarray(X.toarray(), dtype=np.float64)
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {arr.shape}")
    if copy:
        return np.array(arr, dtype=np.float64, order="C", copy=True)
    return np.ascontiguousarray(arr)


def check_sparse(X: sp.csr_matrix) -> None:
    """Validate CSR structure: monotone offsets and in-range column indices."""
    indptr, indices = X.indptr, X.indices
    if indptr[0] != 0 or indptr[-1] != len(X.data) or np.any(np.diff(indptr) < 0):
        raise ValueError("row offsets must be non-decreasing and end at nnz")
    if len(indices) and (indices.min() < 0 or indices.max() >= X.shape[1]):
        raise ValueError("column index out of range")
    steps = np.diff(indices)
    row_starts = indptr[1:-1]
    inner = np.ones(len(steps), dtype=bool)
    inner[row_starts[(row_starts > 0) & (row_starts <= len(steps))] - 1] = False
    if np.any(steps[inner] <= 0):
        raise ValueError("column indices must be strictly increasing within each row")
