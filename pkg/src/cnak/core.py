"""Shared domain types and CSV dataset handling."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np


class DataError(ValueError):
    """Raised for malformed or unusable input data."""


@dataclass(frozen=True)
class Dataset:
    """A dense ``n x d`` matrix of finite values with optional ground truth."""

    points: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = "data"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DataError(f"points must be a non-empty 2-d matrix, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DataError("points contain NaN or infinite values")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.ndim != 1 or lab.shape[0] != pts.shape[0]:
                raise DataError(f"labels must have length {pts.shape[0]}, got shape {lab.shape}")
            if lab.size and (not np.issubdtype(lab.dtype, np.integer) and not np.all(lab == np.round(lab))):
                raise DataError("labels must be integers")
            lab = lab.astype(np.int64)
            if lab.size and lab.min() < 0:
                raise DataError("labels must be non-negative")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def n_true_clusters(self) -> Optional[int]:
        if self.labels is None:
            return None
        return int(np.unique(self.labels).size)

    def subset(self, index: np.ndarray, name: Optional[str] = None) -> "Dataset":
        labels = None if self.labels is None else self.labels[index]
        return Dataset(self.points[index], labels, name or self.name)


@dataclass
class ClusterResult:
    """Output of every clusterer.

    ``labels[i]`` is the index of the centroid nearest to point ``i`` and
    ``inertia`` is the within-cluster sum of squares J(k) of that partition.
    """

    k: int
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    iterations: int = 0
    inertia_history: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


def as_points(data: Union[Dataset, np.ndarray]) -> np.ndarray:
    """Return the point matrix of ``data`` as a float64 2-d array."""
    if isinstance(data, Dataset):
        return data.points
    pts = np.asarray(data, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise DataError(f"expected a non-empty 2-d point matrix, got shape {pts.shape}")
    return pts


def as_labels(labels: Any) -> np.ndarray:
    lab = np.asarray(labels)
    if lab.ndim != 1:
        raise DataError(f"labels must be 1-d, got shape {lab.shape}")
    return lab


def _is_number(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


def load_csv(
    path: Union[str, Path],
    delimiter: str = ",",
    has_labels: Optional[bool] = None,
    name: Optional[str] = None,
) -> Dataset:
    """Read a dataset from CSV.

    A header row is detected when any of its fields is non-numeric. The last
    column is taken as integer ground truth when ``has_labels`` is true, or,
    with ``has_labels=None``, when the header names it ``label``.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path} is empty")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path} has a header but no data rows")
    if has_labels is None:
        has_labels = header is not None and header[-1].lower() == "label"
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=2 if header else 1):
        if len(row) != width:
            raise DataError(f"{path}:{lineno}: expected {width} fields, got {len(row)}")
    try:
        table = np.array([[float(c) if c.strip() else np.nan for c in row] for row in rows])
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric value ({exc})") from None
    if np.isnan(table).any():
        raise DataError(f"{path}: missing or NaN values are not supported")
    labels = None
    if has_labels:
        if width < 2:
            raise DataError(f"{path}: a label column needs at least one feature column")
        raw = table[:, -1]
        if not np.all(raw == np.round(raw)):
            raise DataError(f"{path}: label column is not integer-valued")
        labels = raw.astype(np.int64)
        table = table[:, :-1]
    return Dataset(table, labels, name or path.stem)


def save_csv(data: Dataset, path: Union[str, Path], delimiter: str = ",") -> None:
    """Write ``data`` with a header; ground truth goes in a trailing ``label`` column."""
    path = Path(path)
    header = [f"x{j}" for j in range(data.d)]
    if data.labels is not None:
        header.append("label")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow(header)
        for i in range(data.n):
            row = [repr(float(v)) for v in data.points[i]]
            if data.labels is not None:
                row.append(str(int(data.labels[i])))
            w.writerow(row)
