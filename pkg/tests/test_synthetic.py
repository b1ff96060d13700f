"""Synthetic seedling-style image generator tests."""

from __future__ import annotations

import numpy as np
import pytest

from seedlingcv.dataset import scan_dataset
from seedlingcv.segmentation import SegmentationConfig, segment
from seedlingcv.synthetic import (
    CLASS_NAMES,
    HUE_BANDS,
    SHAPES,
    balanced_counts,
    make_image,
    make_split,
    write_tree,
)
from seedlingcv.tensor import SeededRng


def test_class_catalogue():
    assert len(CLASS_NAMES) == len(SHAPES) * len(HUE_BANDS) == 12
    assert len(set(CLASS_NAMES)) == 12
    for name in CLASS_NAMES:
        shape, hue = name.rsplit("_h", 1)
        assert shape in SHAPES
        assert float(hue) in HUE_BANDS


def test_balanced_counts():
    assert balanced_counts(24) == [2] * 12
    counts = balanced_counts(200)
    assert sum(counts) == 200
    assert max(counts) - min(counts) == 1
    assert balanced_counts(5) == [1] * 5 + [0] * 7


def test_make_image_contract():
    img = make_image(SeededRng(0), 0, size=64)
    assert (img.height, img.width, img.channels) == (64, 64, 3)
    assert img.data.dtype == np.uint8


def test_generator_is_seed_deterministic():
    a = make_image(SeededRng(42), 5, size=48)
    b = make_image(SeededRng(42), 5, size=48)
    c = make_image(SeededRng(43), 5, size=48)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)


def test_every_class_survives_segmentation():
    """The foreground must outlive the erosion step for every class,
    otherwise the segmented training regime would see blank images."""
    cfg = SegmentationConfig()
    rng = SeededRng(17)
    for class_index in range(12):
        for _ in range(5):
            img = make_image(rng, class_index, size=64)
            seg = segment(img, cfg)
            kept = (seg.data.sum(axis=2) > 0).mean()
            assert kept > 0.004, (CLASS_NAMES[class_index], kept)


def test_classes_are_visually_distinct():
    """Mean segmented pixels should differ across classes (same seed)."""
    cfg = SegmentationConfig()
    means = []
    for class_index in range(12):
        img = make_image(SeededRng(99), class_index, size=64)
        means.append(segment(img, cfg).data.astype(np.float64).mean(axis=(0, 1)))
    means = np.stack(means)
    dists = np.linalg.norm(means[:, None] - means[None, :], axis=2)
    np.fill_diagonal(dists, np.inf)
    assert dists.min() > 0.05


def test_make_split_shapes_and_balance():
    train, val, names = make_split(seed=2, n_train=36, n_val=12, size=32)
    assert names == list(CLASS_NAMES)
    assert len(train) == 36 and len(val) == 12
    train_labels = [lab for _, lab in train]
    assert [train_labels.count(i) for i in range(12)] == [3] * 12
    assert all(img.height == 32 for img, _ in train)
    again, _, _ = make_split(seed=2, n_train=36, n_val=12, size=32)
    for (img_a, lab_a), (img_b, lab_b) in zip(train, again):
        assert lab_a == lab_b
        assert np.array_equal(img_a.data, img_b.data)


def test_write_tree_feeds_dataset_scan(tmp_path):
    written = write_tree(tmp_path / "data", seed=4, per_class=3, size=32)
    assert written == 36
    ds = scan_dataset(tmp_path / "data")
    assert list(ds.label_map.names) == sorted(CLASS_NAMES)
    assert len(ds.items) == 36
    # same seed, same bytes
    write_tree(tmp_path / "again", seed=4, per_class=3, size=32)
    a = (tmp_path / "data" / CLASS_NAMES[0] / "img_000.png").read_bytes()
    b = (tmp_path / "again" / CLASS_NAMES[0] / "img_000.png").read_bytes()
    assert a == b


def test_make_image_rejects_bad_class():
    with pytest.raises(ValueError):
        make_image(SeededRng(0), 12, size=64)
