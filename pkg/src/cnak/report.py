"""Run reports, label-file evaluation and aggregate tables."""

from __future__ import annotations

import csv
import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .core import DataError, as_points
from .metrics import all_metrics

METRIC_NAMES = ("ari", "nmi", "homogeneity", "completeness", "silhouette", "gs")
# Exact silhouette is quadratic in n; above this size it is not computed.
SILHOUETTE_LIMIT = 20000


def _clean(value):
    """Recursively replace non-finite floats with None and numpy scalars with Python ones."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


@dataclass
class RunReport:
    method: str
    dataset: str
    selected_k: Optional[int]
    curve: Optional[dict] = None
    metrics: dict = field(default_factory=dict)
    wall_time: float = 0.0
    seed: int = 0
    params: dict = field(default_factory=dict)
    labels: Optional[list] = None

    def __post_init__(self):
        self.curve = _clean(self.curve)
        self.metrics = _clean(self.metrics)
        self.params = _clean(self.params)
        if self.labels is not None:
            self.labels = [int(v) for v in self.labels]
        if self.selected_k is not None:
            self.selected_k = int(self.selected_k)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n")


def quality_metrics(data, truth, pred, k_true: Optional[int] = None, k_pred: Optional[int] = None) -> dict:
    """All external metrics; silhouette is skipped for very large data."""
    x = None if data is None else as_points(data)
    if x is not None and x.shape[0] > SILHOUETTE_LIMIT:
        x = None
    return all_metrics(x, truth, pred, k_true, k_pred)


def read_labels(path: Union[str, Path], delimiter: str = ",") -> np.ndarray:
    """Integer labels from a one-per-line file or the ``label``/last column of a CSV."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path} is empty")
    col = -1
    try:
        float(rows[0][-1])
    except ValueError:
        header = [c.strip().lower() for c in rows[0]]
        col = header.index("label") if "label" in header else len(header) - 1
        rows = rows[1:]
    try:
        vals = np.array([float(r[col]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: bad label value ({exc})") from None
    if not np.all(vals == np.round(vals)):
        raise DataError(f"{path}: labels must be integers")
    return vals.astype(np.int64)


def evaluate(pred_labels, truth_labels, k_true: Optional[int] = None, k_pred: Optional[int] = None,
             data=None, delimiter: str = ",") -> dict:
    """Metrics between two label files (or arrays). ``gs`` needs both k values."""
    pred = read_labels(pred_labels, delimiter) if isinstance(pred_labels, (str, Path)) else np.asarray(pred_labels)
    truth = read_labels(truth_labels, delimiter) if isinstance(truth_labels, (str, Path)) else np.asarray(truth_labels)
    if pred.shape[0] != truth.shape[0]:
        raise DataError(f"label files differ in length: {pred.shape[0]} vs {truth.shape[0]}")
    return _clean(quality_metrics(data, truth, pred, k_true, k_pred))


def aggregate(reports: list) -> list:
    """One row per (dataset, method): modal k over seeds, metric means over the
    runs at the modal k ("mode") and over all runs ("mean")."""
    groups = defaultdict(list)
    for r in reports:
        groups[(r.dataset, r.method)].append(r)
    rows = []
    for (dataset, method), rs in groups.items():
        ks = Counter(r.selected_k for r in rs)
        mode = min(ks, key=lambda k: (-ks[k], -1 if k is None else k))
        row = {"dataset": dataset, "method": method, "runs": len(rs), "k_mode": mode,
               "k_mode_count": ks[mode], "k_counts": ";".join(f"{k}:{c}" for k, c in sorted(
                   ks.items(), key=lambda kv: (kv[0] is None, kv[0] or 0)))}
        at_mode = [r for r in rs if r.selected_k == mode]
        for name in METRIC_NAMES:
            for tag, subset in (("mode", at_mode), ("mean", rs)):
                vals = [r.metrics.get(name) for r in subset if r.metrics.get(name) is not None]
                row[f"{name}_{tag}"] = float(np.mean(vals)) if vals else None
        row["wall_time_mean"] = float(np.mean([r.wall_time for r in rs]))
        rows.append(row)
    return rows


def write_csv(rows: list, path: Union[str, Path]) -> None:
    if not rows:
        raise ValueError("no rows to write")
    fields = list(rows[0])
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if v is None else v) for k, v in row.items()})
