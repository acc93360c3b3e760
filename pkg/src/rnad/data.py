"""Dataset representation, CSV ingestion, standardization, and the
contamination-controlled train/test split.

Internal label convention: 1 = inline (normal), 0 = anomaly. Public CSVs
mostly encode 1 = anomaly, so ingestion takes an explicit convention flag;
nothing is assumed silently.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

INLINE = 1
ANOMALY = 0

#: fraction of inline rows that goes to training
INLINE_TRAIN_FRAC = 0.70
#: fraction of anomaly rows that goes to training
ANOMALY_TRAIN_FRAC = 0.15


class LoadError(ValueError):
    """CSV ingestion failure with row/column context."""


@dataclass
class Dataset:
    """Feature matrix with per-row inline/anomaly labels.

    features: (n, d) float64, NaN-free.
    labels:   (n,) int, values in {INLINE, ANOMALY}.
    """

    features: np.ndarray
    labels: np.ndarray
    name: str = ""
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        n, d = self.features.shape
        if n < 1 or d < 1:
            raise ValueError(f"need at least one row and one column, got {n}x{d}")
        if self.labels.shape != (n,):
            raise ValueError(
                f"labels length {self.labels.shape} does not match {n} rows")
        if not np.isin(self.labels, (INLINE, ANOMALY)).all():
            raise ValueError("labels must be 0 (anomaly) or 1 (inline)")
        if np.isnan(self.features).any():
            raise ValueError("features contain NaN after ingestion")
        if not self.feature_names:
            self.feature_names = [f"x{j}" for j in range(d)]

    @property
    def n_inline(self) -> int:
        return int((self.labels == INLINE).sum())

    @property
    def n_anomaly(self) -> int:
        return int((self.labels == ANOMALY).sum())


@dataclass(frozen=True)
class LoadReport:
    """Ingestion summary emitted alongside a loaded Dataset."""

    rows_read: int
    rows_rejected: int
    n_inline: int
    n_anomaly: int

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_rejected": self.rows_rejected,
            "n_inline": self.n_inline,
            "n_anomaly": self.n_anomaly,
        }


@dataclass(frozen=True)
class SplitIndices:
    """Disjoint train/test row indices covering the whole dataset."""

    train: np.ndarray
    test: np.ndarray
    seed: int

    def digest(self) -> dict:
        import hashlib

        def h(idx):
            return hashlib.sha256(",".join(map(str, idx.tolist())).encode()).hexdigest()

        return {"train": h(self.train), "test": h(self.test)}


@dataclass(frozen=True)
class Standardizer:
    """Per-column affine transform to zero mean, unit scale.

    Constant columns get stddev 1 by convention, so the transform is always
    invertible.
    """

    means: np.ndarray
    stddevs: np.ndarray

    def apply(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.shape[-1] != self.means.shape[0]:
            raise ValueError(
                f"dimension mismatch: {features.shape[-1]} columns vs "
                f"{self.means.shape[0]} fitted")
        return (features - self.means) / self.stddevs

    def invert(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.shape[-1] != self.means.shape[0]:
            raise ValueError(
                f"dimension mismatch: {features.shape[-1]} columns vs "
                f"{self.means.shape[0]} fitted")
        return features * self.stddevs + self.means

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "stddevs": self.stddevs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(means=np.asarray(d["means"], dtype=np.float64),
                   stddevs=np.asarray(d["stddevs"], dtype=np.float64))

    @classmethod
    def identity(cls, d: int) -> "Standardizer":
        return cls(means=np.zeros(d), stddevs=np.ones(d))


def _parse_label(raw: str, row: int, column: str) -> int:
    try:
        value = float(raw)
    except ValueError:
        raise LoadError(
            f"row {row}: label column {column!r} has non-numeric value {raw!r}")
    if value == 0.0:
        return 0
    if value == 1.0:
        return 1
    raise LoadError(
        f"row {row}: label column {column!r} must be binary, got {raw!r}")


def load_csv(path, label_column: str, label_convention: str,
             name: str | None = None) -> tuple[Dataset, LoadReport]:
    """Load a headered CSV with numeric features and one binary label column.

    label_convention maps the file's 0/1 labels onto the internal convention:
    'one_is_anomaly' (the usual public-dataset encoding) or 'one_is_inline'.
    Rows with missing feature values are rejected and counted in the report;
    non-numeric feature cells are an error naming row and column.
    """
    if label_convention not in ("one_is_anomaly", "one_is_inline"):
        raise ValueError(
            f"label_convention must be one_is_anomaly|one_is_inline, "
            f"got {label_convention!r}")
    path = str(path)
    rows_read = 0
    rows_rejected = 0
    feature_rows: list[list[float]] = []
    labels: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError(f"{path}: empty file, header row required")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise LoadError(f"{path}: label column {label_column!r} not in header")
        label_idx = header.index(label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]
        if not feature_names:
            raise LoadError(f"{path}: no feature columns besides the label")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            rows_read += 1
            if len(row) != len(header):
                raise LoadError(
                    f"row {lineno}: expected {len(header)} cells, got {len(row)}")
            raw_label = row[label_idx].strip()
            values = []
            missing = False
            for i, cell in enumerate(row):
                if i == label_idx:
                    continue
                cell = cell.strip()
                if cell == "" or cell.lower() == "nan":
                    missing = True
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise LoadError(
                        f"row {lineno}: non-numeric value {cell!r} in column "
                        f"{header[i]!r}")
                if math.isnan(v):
                    missing = True
                    continue
                values.append(v)
            if missing:
                rows_rejected += 1
                continue
            file_label = _parse_label(raw_label, lineno, label_column)
            if label_convention == "one_is_anomaly":
                labels.append(ANOMALY if file_label == 1 else INLINE)
            else:
                labels.append(INLINE if file_label == 1 else ANOMALY)
            feature_rows.append(values)
    if not feature_rows:
        raise LoadError(f"{path}: no usable rows")
    dataset = Dataset(
        features=np.array(feature_rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        name=name if name is not None else path,
        feature_names=feature_names,
    )
    report = LoadReport(
        rows_read=rows_read,
        rows_rejected=rows_rejected,
        n_inline=dataset.n_inline,
        n_anomaly=dataset.n_anomaly,
    )
    return dataset, report


def contamination_split(dataset: Dataset, seed: int,
                        inline_train_frac: float = INLINE_TRAIN_FRAC,
                        anomaly_train_frac: float = ANOMALY_TRAIN_FRAC) -> SplitIndices:
    """Split with separate inline/anomaly training fractions.

    Exactly floor(inline_train_frac * n_inline) inline rows and
    floor(anomaly_train_frac * n_anomaly) anomaly rows go to training,
    sampled uniformly without replacement under the seed; everything else is
    test. Counts are floored, never rounded, so anomaly leakage into training
    errs low. Sampling is uniform over rows: temporal contiguity of
    time-series data is not preserved.
    """
    if dataset.n_inline < 1:
        raise ValueError("split requires at least one inline row")
    rng = np.random.default_rng(seed)
    inline_idx = np.flatnonzero(dataset.labels == INLINE)
    anomaly_idx = np.flatnonzero(dataset.labels == ANOMALY)
    n_inline_train = int(math.floor(inline_train_frac * inline_idx.size))
    n_anomaly_train = int(math.floor(anomaly_train_frac * anomaly_idx.size))
    inline_perm = rng.permutation(inline_idx)
    anomaly_perm = rng.permutation(anomaly_idx)
    train = np.sort(np.concatenate([inline_perm[:n_inline_train],
                                    anomaly_perm[:n_anomaly_train]]))
    test = np.sort(np.concatenate([inline_perm[n_inline_train:],
                                   anomaly_perm[n_anomaly_train:]]))
    return SplitIndices(train=train.astype(np.int64),
                        test=test.astype(np.int64), seed=seed)


def fit_standardizer(features, rows=None) -> Standardizer:
    """Per-column mean/stddev over the given rows (population convention).

    Accepts a feature matrix or a Dataset. Constant columns get stddev 1.
    rows=None uses every row.
    """
    if isinstance(features, Dataset):
        features = features.features
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {features.shape}")
    if rows is not None:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size == 0:
            raise ValueError("cannot fit a standardizer on an empty row list")
        features = features[rows]
    if features.shape[0] == 0:
        raise ValueError("cannot fit a standardizer on an empty row list")
    means = features.mean(axis=0)
    stddevs = features.std(axis=0)  # ddof=0
    stddevs = np.where(stddevs > 0.0, stddevs, 1.0)
    return Standardizer(means=means, stddevs=stddevs)


def apply_standardizer(std: Standardizer, features: np.ndarray) -> np.ndarray:
    """out[i][j] = (in[i][j] - means[j]) / stddevs[j]."""
    return std.apply(features)
