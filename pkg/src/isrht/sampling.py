"""Column selection on the rotated matrix.

Four strategies build the sampling-and-rescaling map applied after the
Hadamard rotation:

* ``uniform``    -- uniform draws, every kept column rescaled by sqrt(d/r)
* ``nps``        -- draws with probability proportional to squared column
                    norm, column j rescaled by sqrt(1 / (r p_j))
* ``top-r``      -- the r largest-norm columns, no rescaling
* ``supervised`` -- the r columns with the smallest Laplacian score
                    (see :func:`supervised_scores`), no rescaling
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionError, ParameterError

STRATEGIES = ("uniform", "nps", "top-r", "supervised")


@dataclass(frozen=True)
class ColumnSelection:
    indices: np.ndarray
    scales: np.ndarray
    strategy: str

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"unknown strategy {self.strategy!r}")
        if self.indices.shape != self.scales.shape:
            raise DimensionError("indices and scales must have the same length")

    @property
    def r(self) -> int:
        return len(self.indices)

    def apply(self, X_rot: np.ndarray) -> np.ndarray:
        """Gather the selected columns of ``X_rot`` and rescale them."""
        return X_rot[:, self.indices] * self.scales

    def as_matrix(self, d: int) -> np.ndarray:
        """Materialize the d x r sampling matrix (small d only)."""
        S = np.zeros((d, self.r))
        S[self.indices, np.arange(self.r)] = self.scales
        return S


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_r(r: int, d: int | None = None) -> None:
    if r < 1:
        raise ParameterError(f"r must be >= 1, got {r}")
    if d is not None and r > d:
        raise ParameterError(f"r={r} exceeds the number of columns {d}")


def nps_probabilities(sq_norms) -> np.ndarray:
    """Norm-proportional sampling probabilities ``p_j = |x_j|^2 / sum_k |x_k|^2``."""
    sq_norms = np.asarray(sq_norms, dtype=np.float64)
    if np.any(sq_norms < 0):
        raise ParameterError("squared norms must be non-negative")
    total = sq_norms.sum()
    if not total > 0:
        raise DegenerateInputError("all column norms are zero; a zero matrix cannot be norm-sampled")
    p = sq_norms / total
    # keep sum(p) == 1 to the last bit where possible
    return p / p.sum()


def uniform_probabilities(d: int) -> np.ndarray:
    return np.full(d, 1.0 / d)


def draw_with_replacement(p, r: int, seed, strategy: str = "nps") -> ColumnSelection:
    """Draw ``r`` columns i.i.d. from ``p`` and attach the sqrt(1/(r p)) rescaling.

    Duplicate draws are kept.
    """
    _check_r(r)
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ParameterError("p must be a probability vector")
    rng = _as_rng(seed)
    indices = rng.choice(len(p), size=r, replace=True, p=p)
    scales = np.sqrt(1.0 / (r * p[indices]))
    return ColumnSelection(indices.astype(np.int64), scales, strategy)


def uniform_selection(d: int, r: int, seed, replace: bool = False) -> ColumnSelection:
    """Classic SRHT sampling: ``r`` uniform columns, each scaled by sqrt(d/r)."""
    _check_r(r, None if replace else d)
    rng = _as_rng(seed)
    indices = rng.choice(d, size=r, replace=replace).astype(np.int64)
    return ColumnSelection(indices, np.full(r, np.sqrt(d / r)), "uniform")


def _smallest_r(values: np.ndarray, r: int) -> np.ndarray:
    # stable sort: equal values keep index order, so the lower index wins
    order = np.argsort(values, kind="stable")[:r]
    return np.sort(order).astype(np.int64)


def top_r_selection(sq_norms, r: int) -> ColumnSelection:
    """Keep the ``r`` largest-norm columns (ties go to the lower index)."""
    sq_norms = np.asarray(sq_norms, dtype=np.float64)
    _check_r(r, len(sq_norms))
    return ColumnSelection(_smallest_r(-sq_norms, r), np.ones(r), "top-r")


def class_degrees(y, a: float) -> np.ndarray:
    """Row sums of the class affinity matrix (same class 1, other class -a)."""
    y = np.asarray(y)
    pos = y == 1
    n_pos = int(pos.sum())
    n = len(y)
    n_same = np.where(pos, n_pos, n - n_pos)
    return n_same - a * (n - n_same)


def supervised_scores(X_rot, y, a: float = 1.0) -> np.ndarray:
    """Per-column Laplacian score ``b_j = (X^T L X)_jj``.

    ``L = Deg - A`` with ``A_ik = 1`` for same-class pairs (including i == k)
    and ``-a`` otherwise.  Expanding the quadratic form per column gives

        b_j = sum_i deg_i x_ij^2 - (1 + a) sum_c s_cj^2 + a t_j^2

    with ``s_cj`` the column sum over class c and ``t_j`` the full column
    sum, so neither A nor L is ever built.  O(n d) time.
    """
    X_rot = np.asarray(X_rot, dtype=np.float64)
    y = np.asarray(y)
    n = X_rot.shape[0]
    if len(y) != n:
        raise DimensionError(f"{len(y)} labels for {n} rows")
    if a < 0:
        raise ParameterError("tradeoff a must be >= 0")
    if not np.all(np.isin(y, (-1, 1))):
        raise ParameterError("labels must be +1/-1")
    pos = y == 1
    if n < 2 or pos.all() or not pos.any():
        raise DegenerateInputError("supervised scoring needs samples from both classes")

    deg = class_degrees(y, a)
    weighted = np.einsum("i,ij,ij->j", deg, X_rot, X_rot)
    s_pos = pos.astype(np.float64) @ X_rot
    total = X_rot.sum(axis=0)
    s_neg = total - s_pos
    return weighted - (1.0 + a) * (s_pos**2 + s_neg**2) + a * total**2


def supervised_selection(b, r: int, direction: str = "minimize") -> ColumnSelection:
    """Pick the ``r`` columns minimizing (default) or maximizing ``b``."""
    b = np.asarray(b, dtype=np.float64)
    _check_r(r, len(b))
    if direction == "minimize":
        idx = _smallest_r(b, r)
    elif direction == "maximize":
        idx = _smallest_r(-b, r)
    else:
        raise ParameterError(f"direction must be 'minimize' or 'maximize', got {direction!r}")
    return ColumnSelection(idx, np.ones(r), "supervised")
