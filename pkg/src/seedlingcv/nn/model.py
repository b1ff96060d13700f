"""CNN assembly, training loop, and inference.

The architecture is three blocks of [conv-relu, conv-relu, maxpool,
dropout] with channel pairs taken from the config, an optional spatial
attention gate between the last conv pair and the final pool, then a
flatten and the fully connected stack ending in num_classes logits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..tensor import SeededRng
from .layers import AttentionGate, Conv2d, Dense, Dropout, Flatten, Layer, MaxPool2d, Param, Relu
from .loss import softmax_weighted_ce


@dataclass(frozen=True)
class CnnConfig:
    input_size: int = 64
    conv_channels: tuple[int, ...] = (64, 64, 128, 128, 256, 256)
    kernel: int = 3
    pool: int = 2
    dropout_p: float = 0.1
    fc_sizes: tuple[int, ...] = (256, 64)
    num_classes: int = 12
    attention: bool = False
    learning_rate: float = 0.001
    batch_size: int = 32
    epochs: int = 50
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "conv_channels", tuple(self.conv_channels))
        object.__setattr__(self, "fc_sizes", tuple(self.fc_sizes))
        if len(self.conv_channels) == 0 or len(self.conv_channels) % 2 != 0:
            raise ValueError(f"conv_channels must pair up, got {self.conv_channels}")
        pairs = len(self.conv_channels) // 2
        if self.input_size % (self.pool ** pairs) != 0:
            raise ValueError(
                f"input_size {self.input_size} not divisible by pool^{pairs} = {self.pool ** pairs}"
            )
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must lie in [0, 1), got {self.dropout_p}")
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.kernel % 2 == 0 or self.kernel < 1:
            raise ValueError(f"kernel must be odd, got {self.kernel}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")

    @property
    def pairs(self) -> int:
        return len(self.conv_channels) // 2

    @property
    def final_spatial(self) -> int:
        return self.input_size // (self.pool ** self.pairs)

    @property
    def flattened_size(self) -> int:
        return self.conv_channels[-1] * self.final_spatial ** 2

    def to_dict(self) -> dict:
        return {
            "input_size": self.input_size,
            "conv_channels": list(self.conv_channels),
            "kernel": self.kernel,
            "pool": self.pool,
            "dropout_p": self.dropout_p,
            "fc_sizes": list(self.fc_sizes),
            "num_classes": self.num_classes,
            "attention": self.attention,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CnnConfig":
        return cls(**data)


class Model:
    """An ordered layer list plus the RNG that drives dropout masks."""

    def __init__(self, cfg: CnnConfig, layers: list[Layer], rng: SeededRng, dtype):
        self.cfg = cfg
        self.layers = layers
        self.rng = rng
        self.dtype = np.dtype(dtype)
        self.label_names: list[str] | None = None
        self.meta: dict = {}

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, training=training)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def params(self) -> list[Param]:
        out: list[Param] = []
        for layer in self.layers:
            out.extend(layer.params())
        return out


def build_model(cfg: CnnConfig, rng: SeededRng, dtype=np.float32) -> Model:
    """He-initialized model; weight draw order follows the layer order."""
    layers: list[Layer] = []
    in_channels = 3
    conv_index = 0
    for pair in range(cfg.pairs):
        for _ in range(2):
            conv_index += 1
            out_channels = cfg.conv_channels[conv_index - 1]
            layers.append(Conv2d(f"conv{conv_index}", in_channels, out_channels,
                                 cfg.kernel, rng, dtype))
            layers.append(Relu())
            in_channels = out_channels
        if cfg.attention and pair == cfg.pairs - 1:
            layers.append(AttentionGate("attention", in_channels, rng, dtype))
        layers.append(MaxPool2d(cfg.pool))
        layers.append(Dropout(cfg.dropout_p, rng))
    layers.append(Flatten())
    in_features = cfg.flattened_size
    for i, width in enumerate(cfg.fc_sizes):
        layers.append(Dense(f"fc{i + 1}", in_features, width, rng, dtype))
        layers.append(Relu())
        in_features = width
    layers.append(Dense(f"fc{len(cfg.fc_sizes) + 1}", in_features, cfg.num_classes, rng, dtype))
    return Model(cfg, layers, rng, dtype)


def count_parameters(model: Model) -> int:
    return sum(p.value.size for p in model.params())


def _check_batch(model: Model, x: np.ndarray) -> None:
    s = model.cfg.input_size
    if x.ndim != 4 or x.shape[1:] != (3, s, s):
        raise ValueError(f"expected N x 3 x {s} x {s} input, got {x.shape}")


def predict(model: Model, images: np.ndarray, batch_size: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Evaluation-mode class indices and softmax probability rows.

    Argmax ties resolve to the lowest class index.
    """
    _check_batch(model, images)
    batch_size = batch_size or model.cfg.batch_size
    preds = np.empty(images.shape[0], dtype=np.int64)
    probs = np.empty((images.shape[0], model.cfg.num_classes), dtype=np.float64)
    for start in range(0, images.shape[0], batch_size):
        chunk = images[start:start + batch_size]
        logits = model.forward(chunk, training=False).astype(np.float64)
        shifted = logits - logits.max(axis=1, keepdims=True)
        expd = np.exp(shifted)
        probs[start:start + chunk.shape[0]] = expd / expd.sum(axis=1, keepdims=True)
        preds[start:start + chunk.shape[0]] = logits.argmax(axis=1)
    return preds, probs


def train(
    model: Model,
    train_data: tuple[np.ndarray, np.ndarray],
    val_data: tuple[np.ndarray, np.ndarray],
    cfg: CnnConfig,
    class_weights: Sequence[float],
    rng: SeededRng,
) -> list[dict]:
    """Minibatch Adam training; returns the per-epoch history.

    Every epoch reshuffles with the given seeded generator, so a fixed
    seed makes the entire run deterministic. Dropout is active only
    here, never during the validation passes.
    """
    from .optim import Adam

    train_x, train_y = train_data
    val_x, val_y = val_data
    _check_batch(model, train_x)
    if train_x.shape[0] == 0 or val_x.shape[0] == 0:
        raise ValueError("train and validation sets must be non-empty")
    train_y = np.asarray(train_y, dtype=np.int64)
    val_y = np.asarray(val_y, dtype=np.int64)
    weights = np.asarray(class_weights, dtype=np.float64)

    optimizer = Adam(model.params(), cfg.learning_rate)
    n = train_x.shape[0]
    history: list[dict] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        weight_sum = 0.0
        correct = 0
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            xb = train_x[batch]
            yb = train_y[batch]
            logits = model.forward(xb, training=True)
            loss, grad = softmax_weighted_ce(logits, yb, weights)
            model.backward(grad)
            optimizer.step()
            batch_w = weights[yb].sum()
            loss_sum += loss * batch_w
            weight_sum += batch_w
            correct += int((logits.argmax(axis=1) == yb).sum())
        val_preds, _ = predict(model, val_x)
        history.append({
            "epoch": epoch + 1,
            "train_loss": float(loss_sum / weight_sum),
            "train_acc": correct / n,
            "val_acc": float((val_preds == val_y).mean()),
        })
    return history
