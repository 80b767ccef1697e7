"""Tabular dataset loading, splitting and standardization.

Sensors are identified by single-character names following column order:
``A``..``Z`` then ``a``..``z``.
"""
from __future__ import annotations

import csv
import json
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

SENSOR_ALPHABET = string.ascii_uppercase + string.ascii_lowercase


class DatasetError(ValueError):
    """Raised when a data file cannot be turned into a :class:`Dataset`."""


def sensor_name(index: int) -> str:
    if not 0 <= index < len(SENSOR_ALPHABET):
        raise ValueError(f"sensor index {index} outside 0..{len(SENSOR_ALPHABET) - 1}")
    return SENSOR_ALPHABET[index]


def sensor_index(name: str) -> int:
    idx = SENSOR_ALPHABET.find(name)
    if len(name) != 1 or idx < 0:
        raise ValueError(f"not a sensor name: {name!r}")
    return idx


def sensor_names(n: int) -> list[str]:
    return [sensor_name(i) for i in range(n)]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix with integer-encoded labels.

    ``labels[i]`` indexes into ``class_names``.
    """

    features: np.ndarray
    labels: np.ndarray
    sensor_names: tuple[str, ...]
    class_names: tuple[str, ...]
    original_columns: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} labels"
            )
        if self.features.shape[1] != len(self.sensor_names):
            raise ValueError("one sensor name per feature column required")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise ValueError("label outside class_names")
        if np.isnan(self.features).any():
            raise ValueError("datasets may not contain missing cells")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_sensors(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, rows: np.ndarray) -> "Dataset":
        return Dataset(
            self.features[rows],
            self.labels[rows],
            self.sensor_names,
            self.class_names,
            self.original_columns,
        )

    def columns(self, names: Sequence[str]) -> np.ndarray:
        lookup = {n: i for i, n in enumerate(self.sensor_names)}
        try:
            idx = [lookup[n] for n in names]
        except KeyError as exc:
            raise KeyError(f"unknown sensor {exc.args[0]!r}") from None
        return self.features[:, idx]


def _resolve_label_column(header: list[str], label_column: str | int) -> int:
    if isinstance(label_column, int) or (isinstance(label_column, str) and label_column.lstrip("-").isdigit()
                                         and label_column not in header):
        idx = int(label_column)
        if not -len(header) <= idx < len(header):
            raise DatasetError(f"label column index {idx} out of range for {len(header)} columns")
        return idx % len(header)
    if label_column not in header:
        raise DatasetError(f"label column {label_column!r} not in header {header}")
    return header.index(label_column)


def load_csv(path: str | Path, label_column: str | int = -1) -> Dataset:
    """Read a comma-separated file with one header row.

    ``label_column`` is a header name or a (possibly negative) column index.
    Feature columns are renamed alphabetically by their original order and
    classes are encoded in order of first appearance.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DatasetError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DatasetError(f"{path}: no data rows")
    label_idx = _resolve_label_column(header, label_column)
    feature_cols = [i for i in range(len(header)) if i != label_idx]
    if not feature_cols:
        raise DatasetError(f"{path}: no feature columns")
    if len(feature_cols) > len(SENSOR_ALPHABET):
        raise DatasetError(f"{path}: at most {len(SENSOR_ALPHABET)} feature columns supported")

    features = np.empty((len(body), len(feature_cols)), dtype=np.float64)
    raw_labels = []
    for r, row in enumerate(body):
        lineno = r + 2
        if len(row) != len(header):
            raise DatasetError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
        for j, c in enumerate(feature_cols):
            try:
                features[r, j] = float(row[c])
            except ValueError:
                raise DatasetError(
                    f"{path}:{lineno}: column {c} ({header[c]!r}) is not a number: {row[c]!r}"
                ) from None
            if not np.isfinite(features[r, j]):
                raise DatasetError(f"{path}:{lineno}: column {c} ({header[c]!r}) is missing or non-finite")
        raw_labels.append(row[label_idx].strip())

    class_names: dict[str, int] = {}
    for lab in raw_labels:
        class_names.setdefault(lab, len(class_names))
    labels = np.array([class_names[lab] for lab in raw_labels], dtype=np.int64)
    return Dataset(
        features,
        labels,
        tuple(sensor_names(len(feature_cols))),
        tuple(class_names),
        tuple(header[c] for c in feature_cols),
    )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.85
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Uniformly shuffled (non-stratified) train/test partition."""
    n = dataset.n_samples
    n_train = round_half_up(spec.train_fraction * n)
    if n_train <= 0 or n_train >= n:
        raise ValueError(f"train fraction {spec.train_fraction} leaves an empty half for {n} rows")
    order = np.random.default_rng(spec.seed).permutation(n)
    return dataset.subset(np.sort(order[:n_train])), dataset.subset(np.sort(order[n_train:]))


@dataclass(frozen=True)
class StandardizationParams:
    means: np.ndarray
    stds: np.ndarray

    def __len__(self):
        return self.means.shape[0]

    def restrict(self, columns: Sequence[int]) -> "StandardizationParams":
        cols = np.asarray(columns, dtype=int)
        return StandardizationParams(self.means[cols], self.stds[cols])

    def to_json(self) -> str:
        return json.dumps({"means": self.means.tolist(), "stds": self.stds.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "StandardizationParams":
        d = json.loads(text)
        return cls(np.asarray(d["means"], dtype=np.float64), np.asarray(d["stds"], dtype=np.float64))


def fit_standardizer(train: Dataset | np.ndarray) -> StandardizationParams:
    # Population std. Zero-variance columns (up to float round-off in the
    # mean) get std 1 so they map to 0.
    X = train.features if isinstance(train, Dataset) else np.asarray(train, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("cannot fit a standardizer on zero rows")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds > 1e-12 * (1.0 + np.abs(means)), stds, 1.0)
    return StandardizationParams(means, stds)


def apply_standardizer(params: StandardizationParams, matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape[-1] != len(params):
        raise ValueError(f"matrix has {matrix.shape[-1]} columns, standardizer expects {len(params)}")
    return (matrix - params.means) / params.stds


def invert_standardizer(params: StandardizationParams, matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape[-1] != len(params):
        raise ValueError(f"matrix has {matrix.shape[-1]} columns, standardizer expects {len(params)}")
    return matrix * params.stds + params.means
