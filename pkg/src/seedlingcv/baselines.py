"""Classical baselines on flattened features: KNN and one-vs-rest linear SVM.

The SVM minimizes (1/2)||w||^2 + C * sum_i hinge_i per class with a
seeded primal stochastic subgradient method (step 1/(lambda*t) with
lambda = 1/(C*n)); the bias rides along as an implicitly regularized
constant feature. Subgradient steps are not a descent method, so each
epoch's iterate average is scored on the objective and the best one
seen so far is kept; the tracked objective is therefore non-increasing
and the returned weights are the best epoch average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tensor import SeededRng


@dataclass(frozen=True)
class KnnConfig:
    n_neighbours: int = 5
    weighting: str = "uniform"  # distance weighting reserved

    def __post_init__(self):
        if self.n_neighbours < 1:
            raise ValueError(f"n_neighbours must be >= 1, got {self.n_neighbours}")
        if self.weighting != "uniform":
            raise ValueError(f"only uniform weighting is supported, got {self.weighting!r}")

    def params_dict(self) -> dict:
        return {"n_neighbours": self.n_neighbours, "weighting": self.weighting}


@dataclass(frozen=True)
class SvmConfig:
    C: float = 5.0
    kernel: str = "linear"
    gamma: str = "auto"  # recorded for config fidelity; unused by the linear kernel
    epochs: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if self.kernel != "linear":
            raise ValueError(f"only the linear kernel is supported, got {self.kernel!r}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")

    def params_dict(self) -> dict:
        return {"C": self.C, "kernel": self.kernel, "gamma": self.gamma, "epochs": self.epochs}


@dataclass
class GridSearchSpec:
    candidates: list
    folds: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")
        if not self.candidates:
            raise ValueError("need at least one candidate config")


# ---------------------------------------------------------------------------
# KNN
# ---------------------------------------------------------------------------

def knn_grid(n: int) -> list[int]:
    """Odd neighbour counts 1, 3, 5, ... up to floor(sqrt(n))."""
    if n < 1:
        raise ValueError(f"training-set size must be >= 1, got {n}")
    top = math.isqrt(n)
    return list(range(1, top + 1, 2))


@dataclass
class KnnModel:
    features: np.ndarray  # n x d, float64
    labels: np.ndarray    # n, int64
    num_classes: int


def knn_fit(features: np.ndarray, labels: np.ndarray) -> KnnModel:
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValueError(f"features must be a non-empty n x d matrix, got {features.shape}")
    if labels.shape != (features.shape[0],):
        raise ValueError(f"labels shape {labels.shape} does not match {features.shape[0]} rows")
    return KnnModel(features=features, labels=labels, num_classes=int(labels.max()) + 1)


def _pairwise_distances(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    # ||q - p||: expanded form so the heavy part is one matrix product
    q2 = (queries ** 2).sum(axis=1)[:, np.newaxis]
    p2 = (points ** 2).sum(axis=1)[np.newaxis, :]
    d2 = q2 + p2 - 2.0 * (queries @ points.T)
    return np.sqrt(np.maximum(d2, 0.0))


def knn_predict(model: KnnModel, queries: np.ndarray, k: int) -> np.ndarray:
    """Uniform vote among the k nearest by Euclidean distance.

    Distance ties prefer the lower training index; vote ties prefer the
    class with the smaller summed distance, then the lower class index.
    """
    queries = np.asarray(queries, dtype=np.float64)
    n = model.features.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if queries.ndim != 2 or queries.shape[1] != model.features.shape[1]:
        raise ValueError(
            f"queries must be m x {model.features.shape[1]}, got {queries.shape}"
        )
    distances = _pairwise_distances(queries, model.features)
    # stable sort keeps equal distances in training-index order
    nearest = np.argsort(distances, axis=1, kind="stable")[:, :k]
    preds = np.empty(queries.shape[0], dtype=np.int64)
    for row in range(queries.shape[0]):
        votes = np.zeros(model.num_classes, dtype=np.int64)
        dist_sums = np.zeros(model.num_classes, dtype=np.float64)
        for idx in nearest[row]:
            label = model.labels[idx]
            votes[label] += 1
            dist_sums[label] += distances[row, idx]
        best = votes.max()
        tied = np.flatnonzero(votes == best)
        if tied.size > 1:
            tied = tied[dist_sums[tied] == dist_sums[tied].min()]
        preds[row] = tied[0]
    return preds


# ---------------------------------------------------------------------------
# linear SVM
# ---------------------------------------------------------------------------

@dataclass
class SvmModel:
    weights: np.ndarray  # K x d
    bias: np.ndarray     # K
    config: SvmConfig = field(default_factory=SvmConfig)


def svm_objective(w: np.ndarray, b: float, features: np.ndarray,
                  signs: np.ndarray, c: float) -> float:
    """(1/2)(||w||^2 + b^2) + C * sum(hinge) for one binary problem."""
    margins = signs * (features @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins).sum()
    return 0.5 * (float(w @ w) + b * b) + c * hinge


def _fit_binary(features: np.ndarray, signs: np.ndarray, cfg: SvmConfig,
                rng: SeededRng, track_objective: bool = False):
    n, d = features.shape
    lam = 1.0 / (cfg.C * n)
    w = np.zeros(d, dtype=np.float64)
    b = 0.0
    t = 0
    best_w = np.zeros(d, dtype=np.float64)
    best_b = 0.0
    best_obj = math.inf
    epoch_objectives = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        w_sum = np.zeros(d, dtype=np.float64)
        b_sum = 0.0
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            decay = 1.0 - eta * lam
            w *= decay
            b *= decay
            if signs[i] * (features[i] @ w + b) < 1.0:
                w += eta * signs[i] * features[i]
                b += eta * signs[i]
            w_sum += w
            b_sum += b
        obj = svm_objective(w_sum / n, b_sum / n, features, signs, cfg.C)
        if obj < best_obj:
            best_w = w_sum / n
            best_b = b_sum / n
            best_obj = obj
        if track_objective:
            epoch_objectives.append(best_obj)
    return best_w, best_b, epoch_objectives


def svm_fit(features: np.ndarray, labels: np.ndarray, cfg: SvmConfig) -> SvmModel:
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError(f"need at least 2 classes, got {classes.size}")
    num_classes = int(labels.max()) + 1
    weights = np.zeros((num_classes, features.shape[1]), dtype=np.float64)
    bias = np.zeros(num_classes, dtype=np.float64)
    rng = SeededRng(cfg.seed)
    for cls in range(num_classes):
        signs = np.where(labels == cls, 1.0, -1.0)
        w, b, _ = _fit_binary(features, signs, cfg, rng)
        weights[cls] = w
        bias[cls] = b
    return SvmModel(weights=weights, bias=bias, config=cfg)


def svm_predict(model: SvmModel, queries: np.ndarray) -> np.ndarray:
    """Highest per-class score wins; exact ties go to the lower index."""
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != model.weights.shape[1]:
        raise ValueError(
            f"queries must be m x {model.weights.shape[1]}, got {queries.shape}"
        )
    scores = queries @ model.weights.T + model.bias
    return scores.argmax(axis=1)


# ---------------------------------------------------------------------------
# grid search
# ---------------------------------------------------------------------------

def stratified_fold_assignment(labels: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Per-class seeded shuffle dealt round-robin into folds."""
    labels = np.asarray(labels, dtype=np.int64)
    rng = SeededRng(seed)
    assignment = np.empty(labels.shape[0], dtype=np.int64)
    for cls in range(int(labels.max()) + 1):
        members = np.flatnonzero(labels == cls)
        if members.size and members.size < folds:
            raise ValueError(
                f"class {cls} has {members.size} items, fewer than {folds} folds"
            )
        shuffled = list(members)
        rng.shuffle(shuffled)
        for position, index in enumerate(shuffled):
            assignment[index] = position % folds
    return assignment


def _tie_key(candidate) -> float:
    if isinstance(candidate, KnnConfig):
        return candidate.n_neighbours
    return candidate.C


def grid_search(features: np.ndarray, labels: np.ndarray, spec: GridSearchSpec):
    """Stratified k-fold CV over the candidates.

    Returns (best_config, table) where table rows are
    {"params": ..., "fold_acc": [...], "mean_acc": ...} in candidate
    order. Mean-accuracy ties break toward the smaller k or C.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    assignment = stratified_fold_assignment(labels, spec.folds, spec.seed)
    table = []
    scored = []
    for candidate in spec.candidates:
        fold_acc = []
        for fold in range(spec.folds):
            holdout = assignment == fold
            x_tr, y_tr = features[~holdout], labels[~holdout]
            x_va, y_va = features[holdout], labels[holdout]
            if isinstance(candidate, KnnConfig):
                preds = knn_predict(knn_fit(x_tr, y_tr), x_va, candidate.n_neighbours)
            elif isinstance(candidate, SvmConfig):
                preds = svm_predict(svm_fit(x_tr, y_tr, candidate), x_va)
            else:
                raise TypeError(f"unsupported candidate type {type(candidate).__name__}")
            fold_acc.append(float((preds == y_va).mean()))
        mean_acc = float(np.mean(fold_acc))
        table.append({"params": candidate.params_dict(), "fold_acc": fold_acc, "mean_acc": mean_acc})
        scored.append((candidate, mean_acc))
    best = min(scored, key=lambda item: (-item[1], _tie_key(item[0])))[0]
    return best, table
