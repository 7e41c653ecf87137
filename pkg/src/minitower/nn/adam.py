"""Adam optimizer with bias correction."""

from __future__ import annotations

import numpy as np

from ..errors import TrainingError
from .tensor import Tensor


class Adam:
    """Standard Adam over a named parameter dict.

    Moments are zero-initialized; ``step_count`` increases by one per
    ``step`` call.  A NaN/Inf gradient aborts the update untouched.
    """

    def __init__(self, params: dict[str, Tensor], beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8):
        self.params = params
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}
        self._scratch = {k: np.empty_like(p.data) for k, p in params.items()}

    def step(self, lr: float) -> None:
        for name, p in self.params.items():
            if not np.all(np.isfinite(p.grad)):
                raise TrainingError(f"non-finite gradient in {name}; update aborted")
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        for name, p in self.params.items():
            g = p.grad
            m = self.m[name]
            v = self.v[name]
            tmp = self._scratch[name]
            m *= self.beta1
            np.multiply(g, 1.0 - self.beta1, out=tmp)
            m += tmp
            v *= self.beta2
            np.square(g, out=tmp)
            tmp *= 1.0 - self.beta2
            v += tmp
            np.divide(v, bc2, out=tmp)
            np.sqrt(tmp, out=tmp)
            tmp += self.epsilon
            np.divide(m, tmp, out=tmp)
            tmp *= lr / bc1
            p.data -= tmp

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Moment arrays keyed for the optimizer-state checkpoint."""
        out: dict[str, np.ndarray] = {}
        for name in self.params:
            out[f"m.{name}"] = self.m[name]
            out[f"v.{name}"] = self.v[name]
        out["step_count"] = np.array([float(self.step_count)])
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, p in self.params.items():
            self.m[name] = arrays[f"m.{name}"].reshape(p.shape).astype(p.dtype)
            self.v[name] = arrays[f"v.{name}"].reshape(p.shape).astype(p.dtype)
        self.step_count = int(arrays["step_count"][0])
