"""Projection pipelines: random baselines, SRHT and the data-dependent ISRHT variants.

All randomness is consumed in :func:`fit`; :func:`transform` is a pure
function of the fitted :class:`ProjectionModel`, so training and test data
land in the same embedding.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import sampling
from .errors import DimensionError, ParameterError
from .linalg import column_sq_norms, next_power_of_two, random_signs, rotate, to_dense
from .sampling import ColumnSelection

SRHT_FAMILY = ("srht", "isrht-nps", "isrht-topr", "isrht-supervised")
DENSE_RANDOM = ("gaussian", "achlioptas")
METHODS = DENSE_RANDOM + ("sparse-embedding",) + SRHT_FAMILY
FORMAT_TAG = "isrht-projection"


@dataclass(frozen=True)
class CountSketch:
    """Hash every input column to one bucket with a random sign."""

    buckets: np.ndarray
    signs: np.ndarray
    width: int

    @classmethod
    def draw(cls, d: int, width: int, rng: np.random.Generator) -> "CountSketch":
        buckets = rng.integers(0, width, size=d)
        signs = rng.choice(np.array([-1.0, 1.0]), size=d)
        return cls(buckets.astype(np.int64), signs, int(width))

    def matrix(self) -> sp.csr_matrix:
        d = len(self.buckets)
        return sp.csr_matrix((self.signs, (np.arange(d), self.buckets)), shape=(d, self.width))

    def apply(self, X) -> np.ndarray:
        """Scatter-add each column into its bucket; O(nnz(X)) for sparse input."""
        if X.shape[1] != len(self.buckets):
            raise DimensionError(f"sketch expects {len(self.buckets)} columns, got {X.shape[1]}")
        if sp.issparse(X):
            Xc = sp.csr_matrix(X)
            out = np.zeros((X.shape[0], self.width))
            rows = np.repeat(np.arange(X.shape[0]), np.diff(Xc.indptr))
            np.add.at(out, (rows, self.buckets[Xc.indices]), Xc.data * self.signs[Xc.indices])
            return out
        X = np.asarray(X, dtype=np.float64)
        return np.asarray(X @ self.matrix())


@dataclass(frozen=True)
class ProjectionModel:
    method: str
    d: int
    d2: int
    r: int
    signs: np.ndarray | None = None
    selection: ColumnSelection | None = None
    R: np.ndarray | None = None
    sketch: CountSketch | None = None

    @property
    def r_prime(self) -> int | None:
        if self.sketch is not None and self.method in SRHT_FAMILY:
            return self.sketch.width
        return None

    def to_dict(self) -> dict:
        doc = {"format": FORMAT_TAG, "version": 1, "method": self.method, "d": self.d, "d2": self.d2, "r": self.r}
        if self.signs is not None:
            bits = np.packbits(self.signs > 0)
            doc["signs"] = {"length": len(self.signs), "bits": base64.b64encode(bits.tobytes()).decode()}
        if self.selection is not None:
            doc["selection"] = {
                "strategy": self.selection.strategy,
                "indices": self.selection.indices.tolist(),
                "scales": self.selection.scales.tolist(),
            }
        if self.R is not None:
            doc["R"] = {"shape": list(self.R.shape), "float64_le": _b64(self.R.astype("<f8"))}
        if self.sketch is not None:
            doc["sketch"] = {
                "width": self.sketch.width,
                "buckets": _b64(self.sketch.buckets.astype("<i8")),
                "signs": base64.b64encode(np.packbits(self.sketch.signs > 0).tobytes()).decode(),
            }
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ProjectionModel":
        if doc.get("format") != FORMAT_TAG:
            raise ValueError("not a serialized projection model")
        signs = selection = R = sketch = None
        if "signs" in doc:
            signs = _unpack_signs(doc["signs"]["bits"], doc["signs"]["length"])
        if "selection" in doc:
            s = doc["selection"]
            selection = ColumnSelection(
                np.asarray(s["indices"], dtype=np.int64), np.asarray(s["scales"], dtype=np.float64), s["strategy"]
            )
        if "R" in doc:
            R = np.frombuffer(base64.b64decode(doc["R"]["float64_le"]), dtype="<f8").reshape(doc["R"]["shape"]).copy()
        if "sketch" in doc:
            s = doc["sketch"]
            buckets = np.frombuffer(base64.b64decode(s["buckets"]), dtype="<i8").astype(np.int64)
            sketch = CountSketch(buckets, _unpack_signs(s["signs"], len(buckets)), int(s["width"]))
        return cls(doc["method"], int(doc["d"]), int(doc["d2"]), int(doc["r"]), signs, selection, R, sketch)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "ProjectionModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _b64(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr).tobytes()).decode()


def _unpack_signs(b64: str, length: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(base64.b64decode(b64), dtype=np.uint8))[:length]
    return np.where(bits == 1, 1.0, -1.0)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _pad_dense(X, d2: int) -> np.ndarray:
    n, d = X.shape
    out = np.zeros((n, d2))
    if sp.issparse(X):
        Xc = sp.csr_matrix(X)
        rows = np.repeat(np.arange(n), np.diff(Xc.indptr))
        out[rows, Xc.indices] = Xc.data
    else:
        out[:, :d] = X
    return out


def _rotated(X, signs: np.ndarray, d2: int) -> np.ndarray:
    out = _pad_dense(X, d2)
    return rotate(out, signs, out=out)


def select_columns(X_rot: np.ndarray, method: str, r: int, rng, y=None, a: float = 1.0,
                   direction: str = "minimize") -> ColumnSelection:
    """Column selection for one SRHT-family method on an already rotated matrix."""
    d2 = X_rot.shape[1]
    if method == "srht":
        return sampling.uniform_selection(d2, r, rng)
    if method == "isrht-nps":
        p = sampling.nps_probabilities(column_sq_norms(X_rot))
        return sampling.draw_with_replacement(p, r, rng)
    if method == "isrht-topr":
        return sampling.top_r_selection(column_sq_norms(X_rot), r)
    if method == "isrht-supervised":
        b = sampling.supervised_scores(X_rot, y, a)
        return sampling.supervised_selection(b, r, direction)
    raise ParameterError(f"{method!r} is not an SRHT-family method")


def fit_transform(X, y=None, method: str = "srht", r: int = 16, a: float = 1.0, seed=None,
                  direction: str = "minimize") -> tuple[ProjectionModel, np.ndarray]:
    """Fit a projection on ``X`` and return it with the training embedding."""
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if r < 1:
        raise ParameterError(f"r must be >= 1, got {r}")
    if method == "isrht-supervised" and y is None:
        raise ParameterError("isrht-supervised needs training labels")
    n, d = X.shape
    d2 = next_power_of_two(d)
    if r > d2:
        raise ParameterError(f"r={r} exceeds the padded dimension {d2}")
    rng = _rng(seed)

    if method in SRHT_FAMILY:
        signs = random_signs(d2, rng)
        X_rot = _rotated(X, signs, d2)
        selection = select_columns(X_rot, method, r, rng, y=y, a=a, direction=direction)
        model = ProjectionModel(method, d, d2, r, signs=signs, selection=selection)
        return model, selection.apply(X_rot)
    if method == "gaussian":
        R = rng.normal(0.0, np.sqrt(1.0 / d2), size=(d, r))
    elif method == "achlioptas":
        R = rng.choice(np.array([1.0, 0.0, -1.0]), size=(d, r), p=[1 / 6, 2 / 3, 1 / 6]) * np.sqrt(3.0 / r)
    else:
        sketch = CountSketch.draw(d, r, rng)
        model = ProjectionModel(method, d, d2, r, sketch=sketch)
        return model, sketch.apply(X)
    model = ProjectionModel(method, d, d2, r, R=R)
    return model, transform(model, X)


def fit(X, y=None, method: str = "srht", r: int = 16, a: float = 1.0, seed=None,
        direction: str = "minimize") -> ProjectionModel:
    return fit_transform(X, y, method, r, a, seed, direction)[0]


def transform(model: ProjectionModel, X) -> np.ndarray:
    """Embed ``X`` (n x d, dense or sparse) into n x r with a fitted model."""
    if X.shape[1] != model.d:
        raise DimensionError(f"model was fitted on {model.d} features, got {X.shape[1]}")
    if model.method in SRHT_FAMILY:
        if model.sketch is not None:
            X = model.sketch.apply(X)
        return model.selection.apply(_rotated(X, model.signs, model.d2))
    if model.method == "sparse-embedding":
        return model.sketch.apply(X)
    if sp.issparse(X):
        return np.asarray(X @ model.R)
    return to_dense(X) @ model.R


def fit_sparse_pipeline(X, y=None, method: str = "isrht-topr", r: int = 16, r_prime: int | None = None,
                        a: float = 1.0, seed=None, direction: str = "minimize") -> tuple[ProjectionModel, np.ndarray]:
    """Count sketch to ``r_prime`` (default 2r) columns, then an SRHT-family projection to ``r``.

    Returns the combined model and the training embedding.  Memory stays at
    O(nnz(X) + n r_prime) since only the sketched matrix is densified.
    """
    if method not in SRHT_FAMILY:
        raise ParameterError(f"the sparse pipeline supports {SRHT_FAMILY}, got {method!r}")
    if r_prime is None:
        r_prime = 2 * r
    if r_prime < r:
        raise ParameterError(f"r_prime={r_prime} must be >= r={r}")
    rng = _rng(seed)
    sketch = CountSketch.draw(X.shape[1], r_prime, rng)
    Z = sketch.apply(X)
    stage2, emb = fit_transform(Z, y, method, r, a, rng, direction)
    model = ProjectionModel(method, X.shape[1], stage2.d2, r, stage2.signs, stage2.selection, sketch=sketch)
    return model, emb
