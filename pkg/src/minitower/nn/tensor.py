"""Parameter tensor with a gradient slot, plus weight initializers."""

from __future__ import annotations

import numpy as np

from ..errors import TrainingError


class Tensor:
    """Dense n-d array paired with a same-shaped gradient accumulator."""

    __slots__ = ("data", "grad")

    def __init__(self, data: np.ndarray):
        self.data = np.ascontiguousarray(data)
        self.grad = np.zeros_like(self.data)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def check_finite(self, label: str = "tensor") -> None:
        """Raise if data or grad hold NaN/Inf."""
        if not np.all(np.isfinite(self.data)):
            raise TrainingError(f"non-finite values in {label}")
        if not np.all(np.isfinite(self.grad)):
            raise TrainingError(f"non-finite gradient in {label}")

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype})"


def orthogonal(rng: np.random.Generator, shape: tuple[int, ...], gain: float,
               dtype: np.dtype) -> np.ndarray:
    """Orthogonal init: the matrix view (rows=shape[0], cols=rest) has orthonormal rows/cols."""
    rows = shape[0]
    cols = int(np.prod(shape[1:]))
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return (gain * q[:rows, :cols]).reshape(shape).astype(dtype)
