"""Network layers with explicit forward and backward passes.

All 4-D activations are NCHW (batch, channel, height, width). Each
layer caches what its backward pass needs during forward; backward
consumes the upstream gradient and returns the gradient with respect to
the layer input, storing parameter gradients on the Param objects.

Convolutions use stride 1 and zero padding (k-1)/2, so spatial size is
preserved; they are evaluated as a matrix product against im2col
patches. The patch matrix is rebuilt from the cached input during
backward instead of being cached itself, which keeps peak memory at
roughly one activation per layer.
"""

from __future__ import annotations

import math

import numpy as np

from ..tensor import SeededRng


class Param:
    """A named weight tensor and the gradient from the latest backward."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = value
        self.grad = np.zeros_like(value)


def he_normal(rng: SeededRng, shape: tuple[int, ...], fan_in: int, dtype) -> np.ndarray:
    """ReLU-friendly init: normal draws scaled by sqrt(2 / fan_in)."""
    draws = rng.normal(int(np.prod(shape))) * math.sqrt(2.0 / fan_in)
    return draws.reshape(shape).astype(dtype)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Layer:
    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> list[Param]:
        return []


def _im2col(xp: np.ndarray, k: int, out_h: int, out_w: int) -> np.ndarray:
    # (N, C, Hp, Wp) -> (N, C*k*k, out_h*out_w) patch matrix
    n, c = xp.shape[:2]
    windows = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(2, 3))
    cols = windows.transpose(0, 1, 4, 5, 2, 3).reshape(n, c * k * k, out_h * out_w)
    return np.ascontiguousarray(cols)


class Conv2d(Layer):
    """Same-padding stride-1 cross-correlation with F filters of size k x k."""

    def __init__(self, name: str, in_channels: int, out_channels: int, kernel: int,
                 rng: SeededRng, dtype=np.float32):
        if kernel % 2 == 0 or kernel < 1:
            raise ValueError(f"kernel size must be odd, got {kernel}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        fan_in = in_channels * kernel * kernel
        self.w = Param(f"{name}.weight",
                       he_normal(rng, (out_channels, in_channels, kernel, kernel), fan_in, dtype))
        self.b = Param(f"{name}.bias", np.zeros(out_channels, dtype=dtype))
        self._x = None

    def params(self) -> list[Param]:
        return [self.w, self.b]

    def _check_input(self, x: np.ndarray) -> None:
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ValueError(
                f"{self.w.name}: expected NCHW input with {self.in_channels} channels, got {x.shape}"
            )

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        self._check_input(x)
        self._x = x
        n, _, h, w = x.shape
        k = self.kernel
        p = k // 2
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
        cols = _im2col(xp, k, h, w)
        w2 = self.w.value.reshape(self.out_channels, -1)
        out = np.matmul(w2, cols) + self.b.value[:, np.newaxis]
        return out.reshape(n, self.out_channels, h, w)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        x = self._x
        n, _, h, w = x.shape
        k = self.kernel
        p = k // 2
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
        cols = _im2col(xp, k, h, w)
        gmat = grad.reshape(n, self.out_channels, h * w)

        self.b.grad = grad.sum(axis=(0, 2, 3))
        self.w.grad = (
            np.matmul(gmat, cols.transpose(0, 2, 1)).sum(axis=0).reshape(self.w.value.shape)
        )

        w2 = self.w.value.reshape(self.out_channels, -1)
        grad_cols = np.matmul(w2.T, gmat).reshape(n, self.in_channels, k, k, h, w)
        grad_xp = np.zeros_like(xp)
        for ki in range(k):
            for kj in range(k):
                grad_xp[:, :, ki:ki + h, kj:kj + w] += grad_cols[:, :, ki, kj]
        return grad_xp[:, :, p:p + h, p:p + w]


class Relu(Layer):
    """max(0, x); the subgradient at 0 is taken as 0."""

    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        self._mask = x > 0
        return x * self._mask

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad * self._mask


class MaxPool2d(Layer):
    """Non-overlapping p x p max pooling; ties pick the first cell in
    row-major window order, and backward routes each upstream value to
    that argmax cell only."""

    def __init__(self, pool: int = 2):
        if pool < 1:
            raise ValueError(f"pool size must be >= 1, got {pool}")
        self.pool = pool
        self._argmax = None
        self._in_shape = None

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        p = self.pool
        n, c, h, w = x.shape
        if h % p or w % p:
            raise ValueError(f"spatial size {h}x{w} not divisible by pool {p}")
        oh, ow = h // p, w // p
        windows = x.reshape(n, c, oh, p, ow, p).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, oh, ow, p * p)
        self._argmax = windows.argmax(axis=-1)
        self._in_shape = x.shape
        return np.take_along_axis(windows, self._argmax[..., np.newaxis], axis=-1)[..., 0]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        p = self.pool
        n, c, h, w = self._in_shape
        oh, ow = h // p, w // p
        scattered = np.zeros((n, c, oh, ow, p * p), dtype=grad.dtype)
        np.put_along_axis(scattered, self._argmax[..., np.newaxis], grad[..., np.newaxis], axis=-1)
        return scattered.reshape(n, c, oh, ow, p, p).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w)


class Dropout(Layer):
    """Inverted dropout: at train time keep with probability 1-p and scale
    survivors by 1/(1-p); at evaluation time the identity."""

    def __init__(self, p: float, rng: SeededRng):
        if not 0.0 <= p < 1.0:
            raise ValueError(f"dropout probability must lie in [0, 1), got {p}")
        self.p = p
        self.rng = rng
        self._scaled_mask = None

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        if not training or self.p == 0.0:
            self._scaled_mask = None
            return x
        keep = self.rng.uniform(x.size).reshape(x.shape) >= self.p
        self._scaled_mask = keep.astype(x.dtype) / x.dtype.type(1.0 - self.p)
        return x * self._scaled_mask

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._scaled_mask is None:
            return grad
        return grad * self._scaled_mask


class Flatten(Layer):
    def __init__(self):
        self._in_shape = None

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad.reshape(self._in_shape)


class Dense(Layer):
    """Affine map x @ w + b."""

    def __init__(self, name: str, in_features: int, out_features: int,
                 rng: SeededRng, dtype=np.float32):
        self.w = Param(f"{name}.weight", he_normal(rng, (in_features, out_features), in_features, dtype))
        self.b = Param(f"{name}.bias", np.zeros(out_features, dtype=dtype))
        self._x = None

    def params(self) -> list[Param]:
        return [self.w, self.b]

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.w.value.shape[0]:
            raise ValueError(f"{self.w.name}: expected n x {self.w.value.shape[0]} input, got {x.shape}")
        self._x = x
        return x @ self.w.value + self.b.value

    def backward(self, grad: np.ndarray) -> np.ndarray:
        self.w.grad = self._x.T @ grad
        self.b.grad = grad.sum(axis=0)
        return grad @ self.w.value.T


class AttentionGate(Layer):
    """Spatial gate: g = sigmoid(1x1 conv of x down to one channel), then
    y = x * g broadcast over channels."""

    def __init__(self, name: str, channels: int, rng: SeededRng, dtype=np.float32):
        self.channels = channels
        self.w = Param(f"{name}.weight", he_normal(rng, (1, channels, 1, 1), channels, dtype))
        self.b = Param(f"{name}.bias", np.zeros(1, dtype=dtype))
        self._x = None
        self._gate = None

    def params(self) -> list[Param]:
        return [self.w, self.b]

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.channels:
            raise ValueError(f"{self.w.name}: expected NCHW input with {self.channels} channels, got {x.shape}")
        self._x = x
        score = (x * self.w.value).sum(axis=1, keepdims=True) + self.b.value
        self._gate = sigmoid(score)
        return x * self._gate

    def backward(self, grad: np.ndarray) -> np.ndarray:
        x, g = self._x, self._gate
        grad_gate = (grad * x).sum(axis=1, keepdims=True)
        grad_score = grad_gate * g * (1.0 - g)
        self.w.grad = (grad_score * x).sum(axis=(0, 2, 3)).reshape(self.w.value.shape)
        self.b.grad = np.asarray(grad_score.sum(), dtype=grad_score.dtype).reshape(1)
        return grad * g + self.w.value * grad_score
