"""Bias-free L1-loss linear SVM trained by dual coordinate descent.

The dual solved is

    max_a  sum(a) - 1/2 |sum_i a_i y_i x_i|^2     s.t.  0 <= a_i <= C

with ``w = sum_i a_i y_i x_i`` kept up to date after every coordinate step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import DegenerateInputError, DimensionError, ParameterError

C_GRID = tuple(2.0**k for k in range(-5, 6))


@dataclass(frozen=True)
class SvmModel:
    w: np.ndarray
    C: float

    def to_dict(self) -> dict:
        return {"w": self.w.tolist(), "C": self.C}

    @classmethod
    def from_dict(cls, doc: dict) -> "SvmModel":
        return cls(np.asarray(doc["w"], dtype=np.float64), float(doc["C"]))


@dataclass
class DualState:
    alpha: np.ndarray
    objective: float
    epochs: int
    max_violation: float
    converged: bool
    history: np.ndarray


def dual_objective(alpha, X, y) -> float:
    w = (alpha * y) @ X
    return float(alpha.sum() - 0.5 * w @ w)


@numba.njit(cache=True)
def _kkt_violation(X, y, C, alpha, w):
    n, r = X.shape
    worst = 0.0
    for i in range(n):
        g = 0.0
        for k in range(r):
            g += w[k] * X[i, k]
        g = y[i] * g - 1.0
        if alpha[i] <= 0.0:
            pg = min(g, 0.0)
        elif alpha[i] >= C:
            pg = max(g, 0.0)
        else:
            pg = g
        worst = max(worst, abs(pg))
    return worst


@numba.njit(cache=True)
def _dcd(X, y, C, tol, max_iters, seed, alpha, w, history):
    # shrinking follows LIBLINEAR: a bounded variable whose gradient points
    # outward past last epoch's extreme projected gradient leaves the active set
    n, r = X.shape
    np.random.seed(seed)
    qii = np.empty(n)
    for i in range(n):
        s = 0.0
        for k in range(r):
            s += X[i, k] * X[i, k]
        qii[i] = s
    index = np.arange(n)
    active = n
    pg_max_old = np.inf
    pg_min_old = -np.inf
    epoch = 0
    violation = np.inf
    while epoch < max_iters:
        for t in range(active - 1):
            j = t + np.random.randint(0, active - t)
            index[t], index[j] = index[j], index[t]
        pg_max = -np.inf
        pg_min = np.inf
        t = 0
        while t < active:
            i = index[t]
            g = 0.0
            for k in range(r):
                g += w[k] * X[i, k]
            g = y[i] * g - 1.0
            a_old = alpha[i]
            pg = 0.0
            if a_old <= 0.0:
                if g > pg_max_old:
                    active -= 1
                    index[t], index[active] = index[active], index[t]
                    continue
                if g < 0.0:
                    pg = g
            elif a_old >= C:
                if g < pg_min_old:
                    active -= 1
                    index[t], index[active] = index[active], index[t]
                    continue
                if g > 0.0:
                    pg = g
            else:
                pg = g
            pg_max = max(pg_max, pg)
            pg_min = min(pg_min, pg)
            if pg != 0.0:
                if qii[i] > 0.0:
                    a_new = min(max(a_old - g / qii[i], 0.0), C)
                else:
                    a_new = C
                delta = (a_new - a_old) * y[i]
                for k in range(r):
                    w[k] += delta * X[i, k]
                alpha[i] = a_new
            t += 1
        obj = 0.0
        for i in range(n):
            obj += alpha[i]
        ww = 0.0
        for k in range(r):
            ww += w[k] * w[k]
        history[epoch] = obj - 0.5 * ww
        epoch += 1

        if max(pg_max, -pg_min) < tol:
            violation = _kkt_violation(X, y, C, alpha, w)
            if violation < tol:
                break
            # shrunk variables (or the in-epoch drift of w) hide a violation
            active = n
            pg_max_old = np.inf
            pg_min_old = -np.inf
            continue
        pg_max_old = pg_max if pg_max > 0.0 else np.inf
        pg_min_old = pg_min if pg_min < 0.0 else -np.inf
    if violation >= tol:
        violation = _kkt_violation(X, y, C, alpha, w)
    return epoch, violation


def _check_labels(y, n):
    y = np.asarray(y)
    if len(y) != n:
        raise DimensionError(f"{len(y)} labels for {n} rows")
    if not np.all(np.isin(y, (-1, 1))):
        raise ParameterError("labels must be +1/-1")
    if n < 2 or np.all(y == 1) or np.all(y == -1):
        raise DegenerateInputError("training data must contain both classes")
    return y.astype(np.float64)


def train_dual(X, y, C: float, tol: float = 1e-4, max_iters: int = 1000, seed: int = 0) -> tuple[SvmModel, DualState]:
    """Train and also return the final dual state (alphas, objective trace)."""
    if not C > 0:
        raise ParameterError(f"C must be positive, got {C}")
    X = np.ascontiguousarray(X, dtype=np.float64)
    yf = _check_labels(y, X.shape[0])
    alpha = np.zeros(X.shape[0])
    w = np.zeros(X.shape[1])
    history = np.empty(max_iters)
    epochs, violation = _dcd(X, yf, float(C), float(tol), int(max_iters), int(seed) % (2**32), alpha, w, history)
    state = DualState(
        alpha=alpha,
        objective=float(history[epochs - 1]) if epochs else 0.0,
        epochs=int(epochs),
        max_violation=float(violation),
        converged=bool(violation < tol),
        history=history[:epochs].copy(),
    )
    return SvmModel(w, float(C)), state


def train(X, y, C: float, tol: float = 1e-4, max_iters: int = 1000, seed: int = 0) -> SvmModel:
    return train_dual(X, y, C, tol=tol, max_iters=max_iters, seed=seed)[0]


def decision_function(model: SvmModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(model.w):
        raise DimensionError(f"model has {len(model.w)} features, data has shape {X.shape}")
    return X @ model.w


def predict(model: SvmModel, X) -> np.ndarray:
    """Labels sign(<w, x>), with a zero margin counted as +1."""
    return np.where(decision_function(model, X) >= 0, 1, -1).astype(np.int64)


def accuracy(y_true, y_pred) -> float:
    return float(np.mean(np.asarray(y_true) == np.asarray(y_pred)))


def stratified_folds(y, k: int, seed) -> np.ndarray:
    """Fold id (0..k-1) for every sample; each class is dealt round-robin after a shuffle."""
    if k < 2:
        raise ParameterError(f"need at least 2 folds, got {k}")
    y = np.asarray(y)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    fold = np.empty(len(y), dtype=np.int64)
    for c in np.unique(y):
        members = rng.permutation(np.flatnonzero(y == c))
        if len(members) < k:
            raise DegenerateInputError(f"class {c} has {len(members)} samples, fewer than {k} folds")
        fold[members] = np.arange(len(members)) % k
    return fold


def cv_accuracy_table(X, y, C_grid, k: int = 5, seed=0, tol: float = 1e-4, max_iters: int = 1000) -> np.ndarray:
    """Validation accuracy for every (C, fold) pair, shape (len(C_grid), k)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    fold = stratified_folds(y, k, seed)
    table = np.empty((len(C_grid), k))
    for f in range(k):
        held = fold == f
        Xtr, ytr = X[~held], y[~held]
        if len(np.unique(ytr)) < 2 or len(np.unique(y[held])) < 2:
            raise DegenerateInputError(f"fold {f} lost a class after stratification")
        for ci, C in enumerate(C_grid):
            model = train(Xtr, ytr, C, tol=tol, max_iters=max_iters, seed=f)
            table[ci, f] = accuracy(y[held], predict(model, X[held]))
    return table


def cross_validate(X, y, C_grid=C_GRID, k: int = 5, seed=0, **train_kw) -> float:
    """C with the best mean k-fold accuracy; ties go to the smaller C."""
    C_grid = [float(c) for c in C_grid]
    if not C_grid:
        raise ParameterError("C grid is empty")
    if len(C_grid) == 1:
        return C_grid[0]
    table = cv_accuracy_table(X, y, C_grid, k=k, seed=seed, **train_kw)
    means = table.mean(axis=1)
    best = means.max()
    return min(c for c, m in zip(C_grid, means) if m == best)
