"""Experiment harness: method x r sweeps with seeded repetitions.

Each repetition splits (unless a separate test file is given), scales to
[-1, 1] on the training split, fits every projection on the training
split, picks C by stratified k-fold CV on the training embedding, trains,
and scores on the test embedding.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import projections, svm
from .data import Dataset, parse_libsvm, scale_split, split
from .errors import ParameterError
from .projections import METHODS, SRHT_FAMILY
from .synthetic import generate_synthetic

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("method", "r", "repetition", "C", "accuracy", "fit_ms", "transform_ms", "train_ms", "predict_ms")

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    # splitmix64 finalizer; a bijection on 64-bit integers
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def repetition_seed(master_seed: int, repetition: int) -> int:
    """Seed for one repetition: splitmix64 of ``master + golden * (repetition + 1)``.

    The map is injective in ``repetition`` for a fixed master seed, so
    per-repetition seeds never collide.
    """
    return _mix64((master_seed + _GOLDEN * (repetition + 1)) & _MASK64)


@dataclass
class ExperimentConfig:
    dataset: str | None = None
    test_dataset: str | None = None
    synthetic_n_per_class: int | None = None
    n_features: int | None = None
    train_fraction: float = 0.7
    methods: list[str] = field(default_factory=lambda: ["srht"])
    r_values: list[int] = field(default_factory=lambda: [16])
    C_grid: list[float] = field(default_factory=lambda: list(svm.C_GRID))
    repetitions: int = 15
    folds: int = 5
    a: float = 1.0
    seed: int = 0
    sparse_pipeline: bool = False
    r_prime_factor: int = 2
    output: str | None = None
    format: str = "csv"
    record_timings: bool = True
    svm_tol: float = 1e-4
    svm_max_iters: int = 1000

    def __post_init__(self):
        if self.repetitions < 1:
            raise ParameterError("repetitions must be >= 1")
        if not self.r_values or any(r < 1 for r in self.r_values):
            raise ParameterError("r values must all be >= 1")
        if not self.C_grid:
            raise ParameterError("C grid must not be empty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ParameterError(f"unknown method(s) {unknown}; choose from {', '.join(METHODS)}")
        if self.dataset is None and self.synthetic_n_per_class is None:
            raise ParameterError("config needs a dataset path or synthetic_n_per_class")
        if self.format not in ("csv", "json"):
            raise ParameterError(f"format must be csv or json, got {self.format!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ParameterError(f"unknown config keys: {sorted(extra)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        cfg = cls.from_dict(json.loads(path.read_text()))
        # dataset paths are relative to the config file
        base = path.parent
        for attr in ("dataset", "test_dataset", "output"):
            value = getattr(cfg, attr)
            if value is not None and not Path(value).is_absolute():
                setattr(cfg, attr, str(base / value))
        return cfg


@dataclass(frozen=True)
class RunRecord:
    method: str
    r: int
    repetition: int
    C: float
    accuracy: float
    fit_ms: float
    transform_ms: float
    train_ms: float
    predict_ms: float


@dataclass
class ExperimentReport:
    rows: list[RunRecord] = field(default_factory=list)

    def sorted_rows(self) -> list[RunRecord]:
        return sorted(self.rows, key=lambda rec: (rec.method, rec.r, rec.repetition))

    def aggregates(self) -> list[dict]:
        """Mean and (population) standard deviation of accuracy per (method, r)."""
        groups: dict[tuple[str, int], list[RunRecord]] = {}
        for rec in self.sorted_rows():
            groups.setdefault((rec.method, rec.r), []).append(rec)
        out = []
        for (method, r), recs in groups.items():
            acc = np.array([rec.accuracy for rec in recs])
            out.append({
                "method": method,
                "r": r,
                "repetitions": len(recs),
                "accuracy_mean": float(acc.mean()),
                "accuracy_std": float(acc.std()),
                "fit_ms_mean": float(np.mean([rec.fit_ms for rec in recs])),
                "transform_ms_mean": float(np.mean([rec.transform_ms for rec in recs])),
                "train_ms_mean": float(np.mean([rec.train_ms for rec in recs])),
                "predict_ms_mean": float(np.mean([rec.predict_ms for rec in recs])),
            })
        return out

    def aggregate(self, method: str, r: int) -> dict:
        for row in self.aggregates():
            if row["method"] == method and row["r"] == r:
                return row
        raise KeyError((method, r))


def _load(cfg: ExperimentConfig) -> tuple[Dataset, Dataset | None]:
    if cfg.synthetic_n_per_class is not None:
        return generate_synthetic(cfg.synthetic_n_per_class, seed=cfg.seed), None
    ds = parse_libsvm(cfg.dataset, n_features=cfg.n_features)
    if cfg.test_dataset is None:
        return ds, None
    test = parse_libsvm(cfg.test_dataset, n_features=ds.d, label_map=ds.label_map)
    return ds, test


def _ms(t0: float, enabled: bool) -> float:
    return (time.perf_counter() - t0) * 1e3 if enabled else 0.0


def run_repetition(cfg: ExperimentConfig, full: Dataset, test: Dataset | None, repetition: int) -> list[RunRecord]:
    rep_seed = repetition_seed(cfg.seed, repetition)
    split_seq, cv_seq, proj_seq = np.random.SeedSequence(rep_seed).spawn(3)
    if test is None:
        train_ds, test_ds = split(full, cfg.train_fraction, np.random.default_rng(split_seq))
    else:
        train_ds, test_ds = full, test
    train_ds, test_ds = scale_split(train_ds, test_ds)
    if not cfg.sparse_pipeline:
        train_ds, test_ds = train_ds.dense(), test_ds.dense()
    cv_seed = int(cv_seq.generate_state(1)[0])
    timed = cfg.record_timings

    records = []
    proj_seeds = proj_seq.spawn(len(cfg.methods) * len(cfg.r_values))
    for mi, method in enumerate(cfg.methods):
        for ri, r in enumerate(cfg.r_values):
            rng = np.random.default_rng(proj_seeds[mi * len(cfg.r_values) + ri])
            y_fit = train_ds.y if method == "isrht-supervised" else None
            t0 = time.perf_counter()
            try:
                if cfg.sparse_pipeline and method in SRHT_FAMILY:
                    model, Z_train = projections.fit_sparse_pipeline(
                        train_ds.X, y_fit, method, r, r_prime=cfg.r_prime_factor * r, a=cfg.a, seed=rng)
                else:
                    model, Z_train = projections.fit_transform(train_ds.X, y_fit, method, r, a=cfg.a, seed=rng)
            except ValueError as e:
                raise type(e)(f"{method}, r={r}, repetition {repetition}: {e}") from e
            fit_ms = _ms(t0, timed)

            t0 = time.perf_counter()
            Z_test = projections.transform(model, test_ds.X)
            transform_ms = _ms(t0, timed)

            C = svm.cross_validate(Z_train, train_ds.y, cfg.C_grid, k=cfg.folds, seed=cv_seed,
                                   tol=cfg.svm_tol, max_iters=cfg.svm_max_iters)
            t0 = time.perf_counter()
            clf = svm.train(Z_train, train_ds.y, C, tol=cfg.svm_tol, max_iters=cfg.svm_max_iters)
            train_ms = _ms(t0, timed)

            t0 = time.perf_counter()
            pred = svm.predict(clf, Z_test)
            predict_ms = _ms(t0, timed)

            acc = svm.accuracy(test_ds.y, pred)
            records.append(RunRecord(method, r, repetition, C, acc, fit_ms, transform_ms, train_ms, predict_ms))
            logger.debug("%s r=%d rep=%d C=%g acc=%.4f", method, r, repetition, C, acc)
    return records


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    full, test = _load(cfg)
    report = ExperimentReport()
    for rep in range(cfg.repetitions):
        report.rows.extend(run_repetition(cfg, full, test, rep))
    report.rows = report.sorted_rows()
    return report


def report_to_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in report.sorted_rows():
        writer.writerow([repr(v) if isinstance(v, float) else v for v in astuple_ordered(rec)])
    return buf.getvalue()


def astuple_ordered(rec: RunRecord) -> tuple:
    return tuple(getattr(rec, col) for col in CSV_COLUMNS)


def report_to_json(report: ExperimentReport) -> str:
    doc = {
        "columns": list(CSV_COLUMNS),
        "rows": [asdict(rec) for rec in report.sorted_rows()],
        "aggregates": report.aggregates(),
    }
    return json.dumps(doc, indent=1) + "\n"


def report_emit(report: ExperimentReport, fmt: str, path) -> Path:
    """Write the report as ``csv`` or ``json``; the file ends with a newline."""
    if fmt == "csv":
        text = report_to_csv(report)
    elif fmt == "json":
        text = report_to_json(report)
    else:
        raise ParameterError(f"unknown report format {fmt!r}")
    path = Path(path)
    path.write_text(text)
    return path


def read_report_csv(path) -> ExperimentReport:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        rows = [
            RunRecord(
                method=row["method"], r=int(row["r"]), repetition=int(row["repetition"]),
                C=float(row["C"]), accuracy=float(row["accuracy"]),
                fit_ms=float(row["fit_ms"]), transform_ms=float(row["transform_ms"]),
                train_ms=float(row["train_ms"]), predict_ms=float(row["predict_ms"]),
            )
            for row in reader
        ]
    return ExperimentReport(rows)
