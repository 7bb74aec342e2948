"""LIBSVM-format ingestion, [-1, 1] scaling, stratified splits, zero padding."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateInputError, ParameterError, ParseError
from .linalg import next_power_of_two

logger = logging.getLogger(__name__)


@dataclass
class Dataset:
    X: sp.csr_matrix | np.ndarray
    y: np.ndarray
    source: str | None = None
    label_map: dict = field(default_factory=dict)
    scaler: "ScalerParams | None" = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.int64)
        if len(self.y) != self.X.shape[0]:
            raise ValueError(f"{len(self.y)} labels for {self.X.shape[0]} rows")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        return replace(self, X=self.X[idx], y=self.y[idx])

    def dense(self) -> "Dataset":
        if sp.issparse(self.X):
            return replace(self, X=np.ascontiguousarray(self.X.toarray()))
        return self


def normalize_labels(raw: np.ndarray, label_map: dict | None = None) -> tuple[np.ndarray, dict]:
    """Map raw labels onto {+1, -1}.

    With two distinct labels the larger one becomes +1, so {0,1}, {1,2} and
    {-1,+1} encodings all map naturally.  A file holding a single label
    value keeps it if it is already +1/-1, otherwise positive -> +1.
    """
    values = sorted(set(raw.tolist()))
    if label_map is None:
        if len(values) > 2:
            raise ParseError("<labels>", 0, f"more than two distinct labels: {values[:5]}")
        if len(values) == 2:
            label_map = {values[0]: -1, values[1]: 1}
        else:
            label_map = {v: (1 if v > 0 else -1) for v in values}
    try:
        y = np.array([label_map[v] for v in raw.tolist()], dtype=np.int64)
    except KeyError as e:
        raise ParseError("<labels>", 0, f"label {e.args[0]} not in label map") from None
    if label_map and any(k not in (-1, 1) or label_map[k] != k for k in label_map):
        logger.info("label encoding mapped as %s", label_map)
    return y, label_map


def parse_libsvm(path, n_features: int | None = None, label_map: dict | None = None) -> Dataset:
    """Read a LIBSVM/svmlight text file into a CSR matrix.

    Each line is ``label idx:val idx:val ...`` with 1-based, strictly
    increasing indices.  Blank lines and ``#`` comments are skipped.  The
    feature count is the largest index seen unless ``n_features`` pins it.
    """
    path = Path(path)
    labels: list[float] = []
    indptr = [0]
    indices: list[int] = []
    values: list[float] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                labels.append(float(tokens[0]))
            except ValueError:
                raise ParseError(path, lineno, f"non-numeric label {tokens[0]!r}") from None
            prev = 0
            for tok in tokens[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep:
                    raise ParseError(path, lineno, f"expected idx:value, got {tok!r}")
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(path, lineno, f"non-numeric entry {tok!r}") from None
                if idx <= prev:
                    raise ParseError(path, lineno, f"index {idx} not increasing (previous {prev})")
                if not np.isfinite(val):
                    raise ParseError(path, lineno, f"non-finite value {val_s!r}")
                prev = idx
                indices.append(idx - 1)
                values.append(val)
            indptr.append(len(indices))

    max_idx = max(indices) + 1 if indices else 0
    d = max_idx if n_features is None else n_features
    if d < max_idx:
        raise ParseError(path, 0, f"feature index {max_idx} exceeds pinned dimension {d}")
    X = sp.csr_matrix(
        (np.array(values, dtype=np.float64), np.array(indices, dtype=np.int32), np.array(indptr)),
        shape=(len(labels), d),
    )
    y, label_map = normalize_labels(np.array(labels), label_map)
    return Dataset(X, y, source=str(path), label_map=label_map)


def write_libsvm(path, X, y) -> None:
    """Write ``X`` (dense or sparse) and labels in LIBSVM format; zeros are omitted."""
    Xc = sp.csr_matrix(X)
    Xc.eliminate_zeros()
    Xc.sort_indices()
    with open(path, "w") as fh:
        for i in range(Xc.shape[0]):
            lo, hi = Xc.indptr[i], Xc.indptr[i + 1]
            feats = " ".join(f"{j + 1}:{float(v)!r}" for j, v in zip(Xc.indices[lo:hi], Xc.data[lo:hi]))
            label = "+1" if y[i] == 1 else str(int(y[i]))
            fh.write(f"{label} {feats}".rstrip() + "\n")


@dataclass(frozen=True)
class ScalerParams:
    """Per-feature training range used for the [-1, 1] affine map."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        if np.any(self.min > self.max):
            raise ValueError("scaler min exceeds max")


def fit_scaler(X) -> ScalerParams:
    """Per-feature min and max over the training rows (implicit zeros count)."""
    if isinstance(X, Dataset):
        X = X.X
    if sp.issparse(X):
        lo = np.asarray(X.min(axis=0).todense()).ravel()
        hi = np.asarray(X.max(axis=0).todense()).ravel()
    else:
        lo, hi = X.min(axis=0), X.max(axis=0)
    return ScalerParams(lo.astype(np.float64), hi.astype(np.float64))


def apply_scaler(params: ScalerParams, X):
    """Map each feature affinely from [min, max] onto [-1, 1].

    Constant features map to 0 and values outside the training range are
    clamped.  Sparse inputs are scaled by the per-feature max absolute value
    instead, which keeps zeros at zero (and the matrix sparse).
    """
    span = params.max - params.min
    if sp.issparse(X):
        bound = np.maximum(np.abs(params.min), np.abs(params.max))
        inv = np.divide(1.0, bound, out=np.zeros_like(bound), where=bound > 0)
        Xs = sp.csr_matrix(X, dtype=np.float64, copy=True)
        Xs.data *= inv[Xs.indices]
        np.clip(Xs.data, -1.0, 1.0, out=Xs.data)
        Xs.eliminate_zeros()
        return Xs
    X = np.asarray(X, dtype=np.float64)
    const = span <= 0
    safe = np.where(const, 1.0, span)
    out = 2.0 * (X - params.min) / safe - 1.0
    out[:, const] = 0.0
    np.clip(out, -1.0, 1.0, out=out)
    return out


def scale_split(train: Dataset, test: Dataset) -> tuple[Dataset, Dataset]:
    """Fit the scaler on ``train`` only and apply it to both splits."""
    params = fit_scaler(train.X)
    return (
        replace(train, X=apply_scaler(params, train.X), scaler=params),
        replace(test, X=apply_scaler(params, test.X), scaler=params),
    )


def split_indices(y, train_fraction: float, seed) -> tuple[np.ndarray, np.ndarray]:
    """Stratified shuffle split: each class contributes round(fraction * n_c) training rows."""
    if not 0 < train_fraction < 1:
        raise ParameterError(f"train fraction must be in (0, 1), got {train_fraction}")
    y = np.asarray(y)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    train, test = [], []
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        if len(members) < 2:
            raise DegenerateInputError(f"class {c} has fewer than 2 samples")
        members = rng.permutation(members)
        k = int(np.floor(train_fraction * len(members) + 0.5))
        k = min(max(k, 1), len(members) - 1)
        train.append(members[:k])
        test.append(members[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(ds: Dataset, train_fraction: float, seed) -> tuple[Dataset, Dataset]:
    tr, te = split_indices(ds.y, train_fraction, seed)
    return ds.subset(tr), ds.subset(te)


def pad_to_pow2(X):
    """Append zero columns up to the next power-of-two width."""
    d = X.shape[1]
    d2 = next_power_of_two(d)
    if d2 == d:
        return X
    if sp.issparse(X):
        return sp.csr_matrix((X.data, X.indices, X.indptr), shape=(X.shape[0], d2))
    out = np.zeros((X.shape[0], d2), dtype=np.float64)
    out[:, :d] = X
    return out
