"""Dense float tensors and the seeded random generator.

Tensors are plain C-contiguous numpy arrays: float32 is the training
default, float64 is used for gradient checking. The helpers here
validate shapes up front so that shape errors surface before any
arithmetic runs.

Randomness comes from splitmix64, chosen because the published
constants pin the stream bit-for-bit: the same seed yields the same
draws on every machine. The state update is a plain 64-bit add, which
lets bulk generation vectorize (state_i = seed + i*GAMMA).
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# smallest positive float64; substituted for uniform draws of exactly 0
# so Box-Muller's log never sees 0
_TINY = float(np.nextafter(0.0, 1.0))


class SeededRng:
    """splitmix64 generator with a 64-bit integer state."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def _bulk_u64(self, n: int) -> np.ndarray:
        # state_i = state + i*GAMMA (mod 2^64) for i = 1..n, then mix
        idx = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + np.uint64(_GAMMA) * idx
            z ^= z >> np.uint64(30)
            z *= np.uint64(_MIX1)
            z ^= z >> np.uint64(27)
            z *= np.uint64(_MIX2)
            z ^= z >> np.uint64(31)
        self.state = (self.state + n * _GAMMA) & _MASK64
        return z

    def uniform(self, n: int) -> np.ndarray:
        """n float64 values in [0, 1): the 53 high bits divided by 2^53."""
        if n < 0:
            raise ValueError(f"draw count must be >= 0, got {n}")
        if n == 0:
            return np.empty(0, dtype=np.float64)
        bits = self._bulk_u64(n) >> np.uint64(11)
        return bits.astype(np.float64) * (2.0 ** -53)

    def normal(self, n: int) -> np.ndarray:
        """n standard normal draws via Box-Muller on consecutive uniform pairs.

        Always consumes an even number of uniforms; for odd n the last
        draw of the final pair is discarded.
        """
        if n < 0:
            raise ValueError(f"draw count must be >= 0, got {n}")
        if n == 0:
            return np.empty(0, dtype=np.float64)
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs)
        u1 = np.where(u[0::2] == 0.0, _TINY, u[0::2])
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = r * np.cos(2.0 * np.pi * u2)
        out[1::2] = r * np.sin(2.0 * np.pi * u2)
        return out[:n]

    def randint(self, bound: int) -> int:
        """One integer in [0, bound) by modulo reduction."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        return self.next_u64() % bound

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of range(n), deterministic per seed."""
        perm = np.arange(n)
        for i in range(n - 1, 0, -1):
            j = self.randint(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle of a Python list."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]


def tensor(data, dtype=np.float32) -> np.ndarray:
    """A C-contiguous float array of the requested precision."""
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ValueError(f"precision must be float32 or float64, got {dtype}")
    return np.ascontiguousarray(np.asarray(data, dtype=dtype))


def zeros(shape, dtype=np.float32) -> np.ndarray:
    return np.zeros(shape, dtype=dtype)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Standard 2-D matrix product, accumulated in the operands' precision."""
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner extents differ: {a.shape} x {b.shape}")
    return a @ b


def _check_same_shape(a: np.ndarray, b: np.ndarray, op: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{op}: shapes differ, {a.shape} vs {b.shape}")


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b, "add")
    return a + b


def sub(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b, "sub")
    return a - b


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b, "mul")
    return a * b


def scale(a: np.ndarray, s: float) -> np.ndarray:
    if not math.isfinite(s):
        raise ValueError(f"scale factor must be finite, got {s}")
    return a * a.dtype.type(s)


def emap(f, a: np.ndarray) -> np.ndarray:
    """Apply a scalar function pointwise, preserving shape and dtype."""
    out = np.frompyfunc(f, 1, 1)(a)
    return np.asarray(out, dtype=a.dtype)
