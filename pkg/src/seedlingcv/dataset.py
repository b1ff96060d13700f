"""Dataset ingestion: class-per-directory trees, splits, weights, features.

Class indices are assigned by lexicographic directory name so they are
stable across machines; file order inside a class is lexicographic too.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError
from .segmentation import IMAGE_EXTENSIONS, SegmentationConfig, normalize, segment
from .imaging import read_image
from .tensor import SeededRng

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabelMap:
    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise DatasetError(f"duplicate class names: {self.names}")
        if len(self.names) < 2:
            raise DatasetError(f"need at least 2 classes, got {list(self.names)}")

    @property
    def num_classes(self) -> int:
        return len(self.names)


@dataclass
class LabeledDataset:
    items: list[tuple[str, int]]  # (image path, class index)
    label_map: LabelMap
    counts: list[int]

    def __post_init__(self):
        k = self.label_map.num_classes
        if len(self.counts) != k:
            raise DatasetError("counts length does not match class count")
        tally = [0] * k
        for path, label in self.items:
            if not 0 <= label < k:
                raise DatasetError(f"class index {label} out of range for {path}")
            tally[label] += 1
        if tally != list(self.counts):
            raise DatasetError(f"per-class counts {self.counts} inconsistent with items {tally}")

    @property
    def total(self) -> int:
        return len(self.items)

    def labels(self) -> np.ndarray:
        return np.array([label for _, label in self.items], dtype=np.int64)


@dataclass(frozen=True)
class DatasetStats:
    counts: list[int]
    total: int
    weights: list[float]  # w_c = total / (K * counts_c)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def scan_dataset(root) -> LabeledDataset:
    """Build a LabeledDataset from a <root>/<class_name>/<image> tree."""
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset directory not found: {root}")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if len(class_dirs) < 2:
        raise DatasetError(f"need at least 2 class directories under {root}, found {len(class_dirs)}")
    names = tuple(p.name for p in class_dirs)
    label_map = LabelMap(names)
    items: list[tuple[str, int]] = []
    counts = []
    for index, class_dir in enumerate(class_dirs):
        files = sorted(p for p in class_dir.iterdir() if p.is_file())
        images = []
        for path in files:
            if path.suffix.lower() in IMAGE_EXTENSIONS:
                images.append(path)
            else:
                log.warning("ignoring non-image file %s", path)
        if not images:
            raise DatasetError(f"class directory has no images: {class_dir}")
        items.extend((str(p), index) for p in images)
        counts.append(len(images))
    return LabeledDataset(items=items, label_map=label_map, counts=counts)


def _subset(ds: LabeledDataset, picked: list[tuple[str, int]]) -> LabeledDataset:
    counts = [0] * ds.label_map.num_classes
    for _, label in picked:
        counts[label] += 1
    return LabeledDataset(items=picked, label_map=ds.label_map, counts=counts)


def stratified_split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded per-class split; train takes ceil(fraction * n_c) of each class.

    Both sides stay non-empty per class, so the ceil is capped at n_c - 1.
    """
    k = ds.label_map.num_classes
    by_class: list[list[tuple[str, int]]] = [[] for _ in range(k)]
    for item in ds.items:
        by_class[item[1]].append(item)
    for index, members in enumerate(by_class):
        if len(members) < 2:
            raise DatasetError(
                f"class {ds.label_map.names[index]!r} has {len(members)} item(s); need at least 2 to split"
            )
    rng = SeededRng(spec.seed)
    train_items: list[tuple[str, int]] = []
    val_items: list[tuple[str, int]] = []
    for members in by_class:
        shuffled = list(members)
        rng.shuffle(shuffled)
        n_train = min(math.ceil(spec.train_fraction * len(shuffled)), len(shuffled) - 1)
        train_items.extend(shuffled[:n_train])
        val_items.extend(shuffled[n_train:])
    return _subset(ds, train_items), _subset(ds, val_items)


def class_weights(ds: LabeledDataset) -> DatasetStats:
    """Loss weights w_c = total / (K * count_c); count-weighted mean is 1."""
    if any(c <= 0 for c in ds.counts):
        raise DatasetError(f"every class needs at least one item, got counts {ds.counts}")
    k = ds.label_map.num_classes
    weights = [ds.total / (k * c) for c in ds.counts]
    return DatasetStats(counts=list(ds.counts), total=ds.total, weights=weights)


def class_weights_from_labels(labels: np.ndarray, num_classes: int) -> np.ndarray:
    """Same weighting as class_weights but from a label array."""
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=num_classes)
    if counts.size != num_classes or np.any(counts <= 0):
        raise DatasetError(f"every class needs at least one label, got counts {counts.tolist()}")
    total = int(counts.sum())
    return (total / (num_classes * counts)).astype(np.float64)


def stats_dict(ds: LabeledDataset) -> dict:
    """Class-distribution report used by the stats CLI command."""
    return {
        "classes": [
            {"name": name, "count": count}
            for name, count in zip(ds.label_map.names, ds.counts)
        ],
        "total": ds.total,
    }


def load_features(
    ds: LabeledDataset,
    size: int,
    segmented: bool,
    cfg: SegmentationConfig | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Flattened feature rows (n x 3*size^2 float32) in dataset item order.

    An unreadable image aborts the load: training sets must be exact.
    """
    cfg = cfg or SegmentationConfig()
    dim = 3 * size * size
    features = np.empty((ds.total, dim), dtype=np.float32)
    for row, (path, _) in enumerate(ds.items):
        img = read_image(path)
        if segmented:
            img = segment(img, cfg)
        features[row] = normalize(img, size, size).flatten().astype(np.float32)
    return features, ds.labels()
