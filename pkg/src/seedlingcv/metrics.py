"""Accuracy, confusion matrices, per-class metrics, and report rendering."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imaging import RasterImage, write_image


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # K x K, row = true class, column = predicted
    names: list[str]

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.names)
        if self.counts.shape != (k, k):
            raise ValueError(f"counts must be {k}x{k}, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise ValueError("confusion counts must be non-negative")

    @property
    def num_classes(self) -> int:
        return len(self.names)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class ClassMetrics:
    name: str
    precision: float | None  # None when the class was never predicted
    recall: float | None     # None when the class has no samples
    f1: float | None
    support: int


@dataclass
class EvalReport:
    accuracy: float
    per_class: list[ClassMetrics]
    confusion: ConfusionMatrix
    meta: dict = field(default_factory=dict)

    def to_dict(self, confusion_csv: str | None = None) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class": [
                {"name": m.name, "precision": m.precision, "recall": m.recall,
                 "f1": m.f1, "support": m.support}
                for m in self.per_class
            ],
            "confusion_csv": confusion_csv,
            "meta": self.meta,
        }


def accuracy_score(preds: np.ndarray, labels: np.ndarray) -> float:
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {labels.shape}")
    return float((preds == labels).mean())


def confusion(preds, labels, names: list[str]) -> ConfusionMatrix:
    """Count matrix with rows indexed by true class, columns by prediction."""
    preds = np.asarray(preds, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if preds.shape != labels.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {labels.shape}")
    k = len(names)
    for arr, what in ((preds, "prediction"), (labels, "label")):
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ValueError(f"{what} index out of range [0, {k})")
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (labels, preds), 1)
    return ConfusionMatrix(counts=counts, names=list(names))


def summarize(cm: ConfusionMatrix, meta: dict | None = None) -> EvalReport:
    """Accuracy plus per-class precision/recall/F1.

    Precision is flagged undefined (None) when a class was never
    predicted, rather than silently reported as 0.
    """
    if cm.total == 0:
        raise ValueError("cannot summarize an empty confusion matrix")
    diag = np.diag(cm.counts)
    row_sums = cm.counts.sum(axis=1)
    col_sums = cm.counts.sum(axis=0)
    per_class = []
    for i, name in enumerate(cm.names):
        precision = float(diag[i] / col_sums[i]) if col_sums[i] > 0 else None
        recall = float(diag[i] / row_sums[i]) if row_sums[i] > 0 else None
        if precision is None or recall is None:
            f1 = None
        elif precision + recall == 0:
            f1 = 0.0
        else:
            f1 = 2.0 * precision * recall / (precision + recall)
        per_class.append(ClassMetrics(name=name, precision=precision, recall=recall,
                                      f1=f1, support=int(row_sums[i])))
    accuracy = float(diag.sum() / cm.total)
    return EvalReport(accuracy=accuracy, per_class=per_class, confusion=cm, meta=meta or {})


def render_confusion(cm: ConfusionMatrix, path, heatmap_path=None) -> None:
    """CSV with predicted-class header columns and true-class row labels;
    optionally a row-normalized grayscale PPM heatmap (0/0 renders 0)."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true\\predicted"] + list(cm.names))
        for name, row in zip(cm.names, cm.counts):
            writer.writerow([name] + [int(v) for v in row])
    if heatmap_path is not None:
        row_max = cm.counts.max(axis=1, keepdims=True)
        scale = np.where(row_max > 0, row_max, 1)
        gray = np.floor(cm.counts / scale * 255.0 + 0.5).astype(np.uint8)
        write_image(RasterImage(gray[:, :, np.newaxis]), heatmap_path)


def parse_confusion_csv(path) -> ConfusionMatrix:
    """Inverse of render_confusion's CSV, used by round-trip checks."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = rows[0][1:]
    counts = np.array([[int(v) for v in row[1:]] for row in rows[1:]], dtype=np.int64)
    return ConfusionMatrix(counts=counts, names=names)


def comparison_table(results: list[tuple[str, str, float]]) -> str:
    """Markdown table of (algorithm, description, accuracy fraction) rows,
    accuracy rendered as a percentage with 2 decimals, input order kept."""
    if not results:
        raise ValueError("need at least one result row")
    rows = [(algo, desc, f"{acc * 100.0:.2f}") for algo, desc, acc in results]
    headers = ("Algorithm", "Description", "Accuracy (%)")
    widths = [
        max(len(headers[col]), *(len(row[col]) for row in rows))
        for col in range(3)
    ]
    def fmt(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"
    lines = [fmt(headers), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines)
