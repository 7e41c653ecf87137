"""Differentiable layers: explicit forward/backward, no graph machinery.

Every layer follows the same contract: ``forward(x)`` returns ``(y, cache)``
and ``backward(cache, dy)`` returns ``dx`` while accumulating parameter
gradients into the layer's tensors.  ``out_shape`` implements the layer's
shape rule and raises ``ConfigurationError`` on a mismatch.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from .tensor import Tensor, orthogonal


def _im2col(x: np.ndarray, k: int, s: int) -> np.ndarray:
    """Unroll (N, C, H, W) into patch columns (C*k*k, N*OH*OW); copies.

    The channel-major layout turns the convolution, its weight gradient, and
    its input gradient into single large matrix products.
    """
    n, c, h, w = x.shape
    oh = (h - k) // s + 1
    ow = (w - k) // s + 1
    sn, sc, sh, sw = x.strides
    view = np.lib.stride_tricks.as_strided(
        x, (c, k, k, n, oh, ow), (sc, sh, sw, sn, sh * s, sw * s))
    return np.ascontiguousarray(view).reshape(c * k * k, n * oh * ow)


class Conv2d:
    """Valid (unpadded) 2-d convolution over NCHW input."""

    def __init__(self, in_channels: int, out_channels: int, kernel: int, stride: int,
                 rng: np.random.Generator, gain: float = np.sqrt(2.0),
                 dtype: np.dtype = np.float64, name: str = "conv"):
        if kernel < 1 or stride < 1:
            raise ConfigurationError(f"{name}: kernel and stride must be >= 1")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.name = name
        self.w = Tensor(orthogonal(
            rng, (out_channels, in_channels, kernel, kernel), gain, dtype))
        self.b = Tensor(np.zeros(out_channels, dtype=dtype))

    def params(self) -> dict[str, Tensor]:
        return {f"{self.name}.w": self.w, f"{self.name}.b": self.b}

    def out_shape(self, in_shape: tuple[int, ...]) -> tuple[int, ...]:
        n, c, h, w = in_shape
        if c != self.in_channels:
            raise ConfigurationError(
                f"{self.name}: expected {self.in_channels} input channels, "
                f"got input shape {in_shape}")
        oh = (h - self.kernel) // self.stride + 1
        ow = (w - self.kernel) // self.stride + 1
        if oh < 1 or ow < 1:
            raise ConfigurationError(
                f"{self.name}: kernel {self.kernel} stride {self.stride} leaves "
                f"no output for input shape {in_shape}")
        return (n, self.out_channels, oh, ow)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        n, o, oh, ow = self.out_shape(x.shape)
        cols = _im2col(x, self.kernel, self.stride)
        w2 = self.w.data.reshape(o, -1)
        out = w2 @ cols + self.b.data[:, None]
        out = np.ascontiguousarray(out.reshape(o, n, oh, ow).transpose(1, 0, 2, 3))
        return out, (x.shape, cols)

    def backward(self, cache: tuple, dout: np.ndarray,
                 need_input_grad: bool = True) -> np.ndarray | None:
        x_shape, cols = cache
        n, o, oh, ow = dout.shape
        d2 = np.ascontiguousarray(dout.transpose(1, 0, 2, 3)).reshape(o, -1)
        self.w.grad += (d2 @ cols.T).reshape(self.w.shape)
        self.b.grad += d2.sum(axis=1)
        if not need_input_grad:
            return None
        w2 = self.w.data.reshape(o, -1)
        dcols = (w2.T @ d2).reshape(
            self.in_channels, self.kernel, self.kernel, n, oh, ow)
        dx = np.zeros(x_shape, dtype=dout.dtype)
        s, k = self.stride, self.kernel
        for ki in range(k):
            for kj in range(k):
                dx[:, :, ki:ki + s * oh:s, kj:kj + s * ow:s] += \
                    dcols[:, ki, kj].transpose(1, 0, 2, 3)
        return dx


class Dense:
    """Fully connected layer y = x @ W.T + b over (N, in) input."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator,
                 gain: float = np.sqrt(2.0), dtype: np.dtype = np.float64,
                 name: str = "dense"):
        self.in_features = in_features
        self.out_features = out_features
        self.name = name
        self.w = Tensor(orthogonal(rng, (out_features, in_features), gain, dtype))
        self.b = Tensor(np.zeros(out_features, dtype=dtype))

    def params(self) -> dict[str, Tensor]:
        return {f"{self.name}.w": self.w, f"{self.name}.b": self.b}

    def out_shape(self, in_shape: tuple[int, ...]) -> tuple[int, ...]:
        if len(in_shape) != 2 or in_shape[1] != self.in_features:
            raise ConfigurationError(
                f"{self.name}: expected (N, {self.in_features}), got {in_shape}")
        return (in_shape[0], self.out_features)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        self.out_shape(x.shape)
        return x @ self.w.data.T + self.b.data, x

    def backward(self, cache: np.ndarray, dout: np.ndarray) -> np.ndarray:
        x = cache
        self.w.grad += dout.T @ x
        self.b.grad += dout.sum(axis=0)
        return dout @ self.w.data


class ReLU:
    """Elementwise max(x, 0); subgradient 0 at the kink."""

    def __init__(self, name: str = "relu"):
        self.name = name

    def params(self) -> dict[str, Tensor]:
        return {}

    def out_shape(self, in_shape: tuple[int, ...]) -> tuple[int, ...]:
        return in_shape

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mask = x > 0
        return np.where(mask, x, 0.0), mask

    def backward(self, cache: np.ndarray, dout: np.ndarray) -> np.ndarray:
        return np.where(cache, dout, 0.0)


class Flatten:
    """Collapse all trailing axes into one feature axis."""

    def __init__(self, name: str = "flatten"):
        self.name = name

    def params(self) -> dict[str, Tensor]:
        return {}

    def out_shape(self, in_shape: tuple[int, ...]) -> tuple[int, ...]:
        return (in_shape[0], int(np.prod(in_shape[1:])))

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, cache: tuple, dout: np.ndarray) -> np.ndarray:
        return dout.reshape(cache)
