"""Weighted softmax cross-entropy.

Each sample contributes -log p(true class) scaled by its class weight;
the batch loss is that weighted sum divided by the sum of the weights,
so equal weights reduce it to the plain mean cross-entropy.
"""

from __future__ import annotations

import numpy as np


def softmax_weighted_ce(
    logits: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Loss and its exact gradient with respect to the logits.

    Softmax is computed with max-subtraction, so adding a constant to a
    row of logits leaves the loss unchanged.
    """
    labels = np.asarray(labels, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    if logits.ndim != 2:
        raise ValueError(f"logits must be n x K, got {logits.shape}")
    n, k = logits.shape
    if labels.shape != (n,):
        raise ValueError(f"labels must have shape ({n},), got {labels.shape}")
    if weights.shape != (k,):
        raise ValueError(f"need one weight per class: {weights.shape} vs K={k}")
    if np.any(weights <= 0):
        raise ValueError("class weights must be positive")
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"label out of range [0, {k})")

    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    rows = np.arange(n)
    sample_w = weights[labels].astype(logits.dtype)
    total_w = sample_w.sum()
    loss = float(-(sample_w * log_probs[rows, labels]).sum() / total_w)

    grad = np.exp(log_probs) * sample_w[:, np.newaxis]
    grad[rows, labels] -= sample_w
    grad = (grad / total_w).astype(logits.dtype)
    return loss, grad
