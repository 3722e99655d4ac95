"""Tabular datasets, CSV persistence, and feature/response standardization."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from xnn.errors import ValidationError

FLOAT_FMT = "%.17e"


@dataclass
class Dataset:
    """A feature matrix with its response vector and column names."""

    features: np.ndarray
    response: np.ndarray
    feature_names: list[str]
    generator_tag: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.response = np.asarray(self.response, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValidationError(f"features must be 2-d, got shape {self.features.shape}")
        if self.response.ndim != 1:
            raise ValidationError(f"response must be 1-d, got shape {self.response.shape}")
        if self.features.shape[0] != self.response.shape[0]:
            raise ValidationError(
                f"row mismatch: {self.features.shape[0]} feature rows, "
                f"{self.response.shape[0]} response values"
            )
        if len(self.feature_names) != self.features.shape[1]:
            raise ValidationError(
                f"{len(self.feature_names)} names for {self.features.shape[1]} columns"
            )
        if not np.isfinite(self.features).all():
            raise ValidationError("features contain non-finite values")
        if not np.isfinite(self.response).all():
            raise ValidationError("response contains non-finite values")

    @property
    def num_rows(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]


@dataclass
class StandardizationParams:
    """Per-column shift/scale parameters fitted by :func:`standardize_fit`."""

    means: np.ndarray
    stds: np.ndarray
    response_mean: float
    response_std: float

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=np.float64)
        self.stds = np.asarray(self.stds, dtype=np.float64)
        if self.means.shape != self.stds.shape or self.means.ndim != 1:
            raise ValidationError("means and stds must be 1-d arrays of equal length")
        if not (np.all(self.stds > 0) and self.response_std > 0):
            raise ValidationError("standard deviations must be strictly positive")

    def transform_features(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.means) / self.stds

    def invert_features(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) * self.stds + self.means

    def transform_response(self, y: np.ndarray) -> np.ndarray:
        return (np.asarray(y, dtype=np.float64) - self.response_mean) / self.response_std

    def invert_response(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=np.float64) * self.response_std + self.response_mean


def standardize_fit(data: Dataset) -> tuple[Dataset, StandardizationParams]:
    """Shift/scale every feature column and the response to sample mean 0, sample std 1.

    Standard deviations use the n-1 divisor.  A constant feature column is an
    error; a constant response is centered but left unscaled so that degenerate
    targets (e.g. a constant teacher model being distilled) remain trainable.
    """
    if data.num_rows < 2:
        raise ValidationError("standardization needs at least 2 rows")
    means = data.features.mean(axis=0)
    stds = data.features.std(axis=0, ddof=1)
    for j, s in enumerate(stds):
        if s == 0.0:
            raise ValidationError(f"feature column '{data.feature_names[j]}' is constant")
    response_mean = float(data.response.mean())
    response_std = float(data.response.std(ddof=1))
    if response_std == 0.0:
        response_std = 1.0
    params = StandardizationParams(means, stds, response_mean, response_std)
    standardized = Dataset(
        params.transform_features(data.features),
        params.transform_response(data.response),
        list(data.feature_names),
        data.generator_tag,
    )
    return standardized, params


def save_dataset(data: Dataset, path, metadata: dict | None = None) -> None:
    """Write a dataset as CSV (features then response column ``y``) plus a JSON sidecar."""
    path = Path(path)
    table = np.column_stack([data.features, data.response])
    header = ",".join([*data.feature_names, "y"])
    np.savetxt(path, table, fmt=FLOAT_FMT, delimiter=",", header=header, comments="")
    sidecar = {
        "generator_tag": data.generator_tag,
        "num_rows": data.num_rows,
        "feature_names": data.feature_names,
        "response_name": "y",
    }
    if metadata:
        sidecar.update(metadata)
    with open(path.with_name(path.name + ".meta.json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(path, response_column: str | None = None) -> Dataset:
    """Read a CSV with a header row; the response is the last column unless named."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
    if not header:
        raise ValidationError(f"{path}: empty file")
    columns = [c.strip() for c in header.split(",")]
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"{path}: could not parse numeric data ({exc})") from exc
    if table.shape[1] != len(columns):
        raise ValidationError(
            f"{path}: header names {len(columns)} columns, rows have {table.shape[1]}"
        )
    if response_column is None:
        response_idx = len(columns) - 1
    elif response_column in columns:
        response_idx = columns.index(response_column)
    else:
        raise ValidationError(f"{path}: no column named '{response_column}'")
    feature_idx = [j for j in range(len(columns)) if j != response_idx]
    return Dataset(
        table[:, feature_idx],
        table[:, response_idx],
        [columns[j] for j in feature_idx],
        generator_tag=f"file:{path.name}",
    )
