"""Two-Gaussian toy data that defeats uniform column sampling after rotation."""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp

from .data import Dataset
from .errors import ParameterError

logger = logging.getLogger(__name__)

CLASS_MEANS = (np.array([3.0, 3.0]), np.array([-3.0, -3.0]))
PRINTED_COVARIANCE = np.array([[1.0, 1.75], [1.75, 1.0]])


def nearest_psd(S: np.ndarray) -> np.ndarray:
    """Symmetrize and clamp negative eigenvalues to zero."""
    S = 0.5 * (S + S.T)
    vals, vecs = np.linalg.eigh(S)
    return (vecs * np.clip(vals, 0.0, None)) @ vecs.T


def _psd_factor(S: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (S + S.T))
    if vals.min() < 0:
        logger.info("covariance has negative eigenvalue %.3g; clamped to 0", vals.min())
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def sampling_covariance() -> np.ndarray:
    """The covariance actually sampled from (PSD projection of the printed one)."""
    return nearest_psd(PRINTED_COVARIANCE)


def generate_synthetic(n_per_class: int, seed=None) -> Dataset:
    """``n_per_class`` points around (3, 3) labelled +1 and around (-3, -3) labelled -1.

    The +1 rows come first, then the -1 rows.
    """
    if n_per_class < 2:
        raise ParameterError(f"n_per_class must be >= 2, got {n_per_class}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    factor = _psd_factor(PRINTED_COVARIANCE)
    blocks = [mean + rng.standard_normal((n_per_class, 2)) @ factor.T for mean in CLASS_MEANS]
    X = np.vstack(blocks)
    y = np.concatenate([np.ones(n_per_class, dtype=np.int64), -np.ones(n_per_class, dtype=np.int64)])
    return Dataset(X, y, source=f"synthetic(n_per_class={n_per_class})")


def embed_sparse(ds: Dataset, d: int, seed=None, noise_per_row: int = 0, noise_scale: float = 0.1) -> Dataset:
    """Place the features of ``ds`` at random coordinates of a ``d``-dim sparse space.

    Optionally sprinkle ``noise_per_row`` small uniform entries on other
    coordinates so rows are not trivially supported on the same columns.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    X = np.asarray(ds.X.toarray() if sp.issparse(ds.X) else ds.X)
    n, k = X.shape
    if k + noise_per_row > d:
        raise ParameterError("target dimension too small")
    coords = rng.choice(d, size=k, replace=False)
    free = np.setdiff1d(np.arange(d), coords)
    rows, cols, vals = [], [], []
    for i in range(n):
        cols_i = list(coords)
        vals_i = list(X[i])
        if noise_per_row:
            cols_i += list(rng.choice(free, size=noise_per_row, replace=False))
            vals_i += list(rng.uniform(-noise_scale, noise_scale, size=noise_per_row))
        rows += [i] * len(cols_i)
        cols += cols_i
        vals += vals_i
    M = sp.csr_matrix((vals, (rows, cols)), shape=(n, d))
    M.sort_indices()
    return Dataset(M, ds.y, source=f"{ds.source} embedded in {d} dims")
