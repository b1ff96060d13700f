"""Four-way comparison on one shared train/validation split.

Runs the two classical baselines on segmented features and the CNN in
both regimes (raw input with the attention gate, segmented input
without it), then reports validation accuracy per row.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np

from .baselines import (
    GridSearchSpec,
    KnnConfig,
    SvmConfig,
    grid_search,
    knn_fit,
    knn_grid,
    knn_predict,
    svm_fit,
    svm_predict,
)
from .dataset import class_weights_from_labels
from .nn import CnnConfig, build_model, train
from .segmentation import SegmentationConfig, normalize, segment
from .tensor import SeededRng

log = logging.getLogger(__name__)


def features_from_images(images, size: int, segmented: bool,
                         cfg: SegmentationConfig) -> np.ndarray:
    """Stack per-image feature rows (channel-major flattened pixels)."""
    rows = []
    for image in images:
        source = segment(image, cfg) if segmented else image
        rows.append(normalize(source, size, size).flatten())
    return np.stack(rows).astype(np.float32)


def _to_nchw(features: np.ndarray, size: int) -> np.ndarray:
    n, dim = features.shape
    if dim != 3 * size * size:
        raise ValueError(f"feature dim {dim} does not match 3x{size}x{size}")
    return features.reshape(n, 3, size, size)


def _train_cnn(cfg: CnnConfig, x_train, y_train, x_val, y_val, weights):
    rng = SeededRng(cfg.seed)
    model = build_model(cfg, rng)
    history = train(model,
                    (_to_nchw(x_train, cfg.input_size), y_train),
                    (_to_nchw(x_val, cfg.input_size), y_val),
                    cfg, weights, rng)
    acc = history[-1]["val_acc"] if history else 0.0
    return model, history, acc


def run_comparison(features: dict, y_train: np.ndarray, y_val: np.ndarray,
                   class_names: list[str], cnn_cfg: CnnConfig,
                   svm_base: SvmConfig, c_grid, folds: int, seed: int,
                   knn_max_k: int | None = None) -> dict:
    """Evaluate all four regimes; features holds train_seg / val_seg /
    train_raw / val_raw matrices built from the same split."""
    x_tr_seg = features["train_seg"]
    x_va_seg = features["val_seg"]
    n_train = x_tr_seg.shape[0]

    ks = knn_grid(n_train)
    if knn_max_k is not None:
        ks = [k for k in ks if k <= knn_max_k] or ks[:1]
    knn_spec = GridSearchSpec([KnnConfig(n_neighbours=k) for k in ks], folds, seed)
    best_knn, knn_table = grid_search(x_tr_seg, y_train, knn_spec)
    log.info("knn grid best: k=%d", best_knn.n_neighbours)
    knn_model = knn_fit(x_tr_seg, y_train)
    knn_acc = float(np.mean(knn_predict(knn_model, x_va_seg, best_knn.n_neighbours) == y_val))

    svm_candidates = [dataclasses.replace(svm_base, C=float(c)) for c in c_grid]
    svm_spec = GridSearchSpec(svm_candidates, folds, seed)
    best_svm, svm_table = grid_search(x_tr_seg, y_train, svm_spec)
    log.info("svm grid best: C=%g", best_svm.C)
    svm_model = svm_fit(x_tr_seg, y_train, best_svm)
    svm_acc = float(np.mean(svm_predict(svm_model, x_va_seg) == y_val))

    weights = class_weights_from_labels(y_train, len(class_names))

    att_cfg = dataclasses.replace(cnn_cfg, attention=True, num_classes=len(class_names))
    att_model, att_history, att_acc = _train_cnn(
        att_cfg, features["train_raw"], y_train, features["val_raw"], y_val, weights)
    att_model.label_names = list(class_names)

    seg_cfg = dataclasses.replace(cnn_cfg, attention=False, num_classes=len(class_names))
    seg_model, seg_history, seg_acc = _train_cnn(
        seg_cfg, x_tr_seg, y_train, x_va_seg, y_val, weights)
    seg_model.label_names = list(class_names)

    rows = [
        ("KNN", "with background segmentation", knn_acc),
        ("SVM", "with background segmentation", svm_acc),
        ("CNN", "with attention", att_acc),
        ("CNN", "with background segmentation", seg_acc),
    ]
    return {
        "rows": rows,
        "knn": {"best": best_knn, "table": knn_table, "accuracy": knn_acc, "model": knn_model},
        "svm": {"best": best_svm, "table": svm_table, "accuracy": svm_acc, "model": svm_model},
        "cnn_attention": {"history": att_history, "accuracy": att_acc, "model": att_model},
        "cnn_segmented": {"history": seg_history, "accuracy": seg_acc, "model": seg_model},
    }
