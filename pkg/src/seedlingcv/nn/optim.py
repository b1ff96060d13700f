"""Adam with bias correction.

Update rule per tensor:

    m <- b1*m + (1-b1)*g          v <- b2*v + (1-b2)*g^2
    param -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)

The step counter t is shared by every tensor of a model and counts
optimizer steps starting at 1.
"""

from __future__ import annotations

import numpy as np

from .layers import Param


def adam_step(
    param: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    t: int,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One in-place Adam update of param and of the moment buffers."""
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    if t < 1:
        raise ValueError(f"step counter must be >= 1, got {t}")
    if not param.shape == grad.shape == m.shape == v.shape:
        raise ValueError(
            f"shape mismatch: param {param.shape}, grad {grad.shape}, m {m.shape}, v {v.shape}"
        )
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)


class Adam:
    def __init__(self, params: list[Param], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = [np.zeros_like(p.value) for p in params]
        self._v = [np.zeros_like(p.value) for p in params]

    def step(self) -> None:
        self.t += 1
        for p, m, v in zip(self.params, self._m, self._v):
            adam_step(p.value, p.grad, m, v, self.t, self.lr, self.beta1, self.beta2, self.eps)
