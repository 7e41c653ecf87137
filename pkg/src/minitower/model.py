"""Feed-forward convolutional actor-critic with branched policy heads.

Input is a stack of RGB frames plus a 2-value game-state vector.  The frames
run through a conv encoder, the flattened result is concatenated with the
game state and fed through one shared hidden layer.  Value and policy sides
each own a private hidden layer; the policy side ends in one logit head per
action branch (a single policy trunk feeds all heads).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import nn
from .errors import ConfigurationError, UsageError


def joint_action_count(branch_sizes: tuple[int, ...] | list[int]) -> int:
    """Number of joint action combinations expressed by the branches."""
    return int(np.prod(branch_sizes)) if len(branch_sizes) else 1


@dataclass(frozen=True)
class ModelConfig:
    frame_height: int = 64
    frame_width: int = 64
    stacked_frames: int = 3
    color_channels: int = 3
    game_state_dims: int = 2
    hidden_size: int = 512
    branch_sizes: tuple[int, ...] = (2, 2, 3)
    # (out_channels, kernel, stride) per conv layer
    conv_layers: tuple[tuple[int, int, int], ...] = ((32, 8, 4), (64, 4, 2), (64, 3, 1))
    precision: str = "float64"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(self.precision)

    @property
    def encoder_channels(self) -> int:
        return self.stacked_frames * self.color_channels

    def validate(self) -> None:
        if self.stacked_frames < 1:
            raise ConfigurationError("stacked_frames must be >= 1")
        if any(n < 2 for n in self.branch_sizes):
            raise ConfigurationError("branch sizes must all be >= 2")
        if self.precision not in ("float32", "float64"):
            raise ConfigurationError(f"unsupported precision {self.precision!r}")


@dataclass
class EvalCache:
    """Forward-pass intermediates needed by ``ActorCritic.backward``."""

    encoder: list = field(default_factory=list)
    trunk: list = field(default_factory=list)
    value_path: list = field(default_factory=list)
    policy_path: list = field(default_factory=list)
    head_caches: list = field(default_factory=list)
    probs: list = field(default_factory=list)
    branch_entropies: list = field(default_factory=list)
    actions: np.ndarray | None = None
    flat_width: int = 0


class ActorCritic:
    """The trainable network; single-writer, snapshot for cross-thread reads."""

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        config.validate()
        self.config = config
        dtype = config.dtype

        self.convs: list = []
        in_ch = config.encoder_channels
        for i, (out_ch, kernel, stride) in enumerate(config.conv_layers):
            self.convs.append(nn.Conv2d(in_ch, out_ch, kernel, stride, rng,
                                        dtype=dtype, name=f"conv{i}"))
            self.convs.append(nn.ReLU(name=f"conv{i}.relu"))
            in_ch = out_ch
        self.flatten = nn.Flatten()
        self.flat_width = self._compute_flat_width()

        concat_width = self.flat_width + config.game_state_dims
        hidden = config.hidden_size
        self.shared = nn.Dense(concat_width, hidden, rng, dtype=dtype, name="shared")
        self.shared_relu = nn.ReLU(name="shared.relu")
        self.value_trunk = nn.Dense(hidden, hidden, rng, dtype=dtype, name="value_trunk")
        self.value_relu = nn.ReLU(name="value_trunk.relu")
        self.value_head = nn.Dense(hidden, 1, rng, gain=1.0, dtype=dtype,
                                   name="value_head")
        self.policy_trunk = nn.Dense(hidden, hidden, rng, dtype=dtype,
                                     name="policy_trunk")
        self.policy_relu = nn.ReLU(name="policy_trunk.relu")
        self.heads = [
            nn.Dense(hidden, n, rng, gain=0.01, dtype=dtype, name=f"policy_head{b}")
            for b, n in enumerate(config.branch_sizes)
        ]

    def _compute_flat_width(self) -> int:
        cfg = self.config
        shape = (1, cfg.encoder_channels, cfg.frame_height, cfg.frame_width)
        for layer in self.convs:
            shape = layer.out_shape(shape)
        return self.flatten.out_shape(shape)[1]

    # -- parameters ------------------------------------------------------

    def params(self) -> dict[str, nn.Tensor]:
        out: dict[str, nn.Tensor] = {}
        layers = self.convs + [self.shared, self.value_trunk, self.value_head,
                               self.policy_trunk] + self.heads
        for layer in layers:
            out.update(layer.params())
        return out

    def zero_grad(self) -> None:
        for p in self.params().values():
            p.zero_grad()

    def grads(self) -> dict[str, np.ndarray]:
        return {k: p.grad.copy() for k, p in self.params().items()}

    def save(self, path: str | Path) -> None:
        nn.save_tensors(path, {k: p.data for k, p in self.params().items()})

    def load(self, path: str | Path) -> None:
        arrays = nn.load_tensors(path)
        params = self.params()
        if set(arrays) != set(params):
            raise ConfigurationError(
                f"checkpoint {path} does not match this model configuration")
        for name, p in params.items():
            if arrays[name].shape != p.shape:
                raise ConfigurationError(
                    f"checkpoint tensor {name} has shape {arrays[name].shape}, "
                    f"model expects {p.shape}")
            p.data[...] = arrays[name].astype(p.dtype)

    def set_params(self, arrays: dict[str, np.ndarray]) -> None:
        for name, p in self.params().items():
            p.data[...] = arrays[name]

    def param_arrays(self) -> dict[str, np.ndarray]:
        return {k: p.data.copy() for k, p in self.params().items()}

    # -- forward ---------------------------------------------------------

    def pack_frames(self, frames: np.ndarray) -> np.ndarray:
        """(B, S, H, W, 3) stacks to NCHW with frame-major channel order."""
        b, s, h, w, c = frames.shape
        packed = np.moveaxis(frames, 4, 2).reshape(b, s * c, h, w)
        return np.ascontiguousarray(packed, dtype=self.config.dtype)

    def _run(self, layers: list, x: np.ndarray, caches: list) -> np.ndarray:
        for layer in layers:
            x, c = layer.forward(x)
            caches.append((layer, c))
        return x

    @staticmethod
    def _back(caches: list, d: np.ndarray) -> np.ndarray:
        for layer, cache in reversed(caches):
            d = layer.backward(cache, d)
        return d

    def _forward(self, frames: np.ndarray, game_state: np.ndarray) -> tuple:
        cfg = self.config
        if frames.ndim != 5 or frames.shape[1:] != (
                cfg.stacked_frames, cfg.frame_height, cfg.frame_width,
                cfg.color_channels):
            raise UsageError(
                f"frames shape {frames.shape} does not match the model config")
        if game_state.shape != (frames.shape[0], cfg.game_state_dims):
            raise UsageError(
                f"game-state shape {game_state.shape} does not match the model config")
        cache = EvalCache(flat_width=self.flat_width)
        x = self.pack_frames(frames)
        x = self._run(self.convs, x, cache.encoder)
        flat, fcache = self.flatten.forward(x)
        cache.encoder.append((self.flatten, fcache))
        concat = np.concatenate(
            [flat, np.asarray(game_state, dtype=cfg.dtype)], axis=1)
        h = self._run([self.shared, self.shared_relu], concat, cache.trunk)
        vh = self._run([self.value_trunk, self.value_relu], h, cache.value_path)
        value, vhc = self.value_head.forward(vh)
        cache.value_path.append((self.value_head, vhc))
        ph = self._run([self.policy_trunk, self.policy_relu], h, cache.policy_path)
        logits = []
        for head in self.heads:
            z, hc = head.forward(ph)
            cache.head_caches.append(hc)
            logits.append(z)
        return logits, value[:, 0], cache

    def act(self, frames: np.ndarray, game_state: np.ndarray,
            rng: np.random.Generator,
            greedy: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Sample one action per branch; returns (actions, joint log-probs, values).

        Uniform draws are consumed branch-by-branch, each a batch at a time.
        ``greedy`` picks the argmax per branch instead (debugging aid).
        """
        logits, value, _ = self._forward(frames, game_state)
        b = frames.shape[0]
        actions = np.zeros((b, len(self.heads)), dtype=np.int64)
        logp = np.zeros(b, dtype=np.float64)
        rows = np.arange(b)
        for i, z in enumerate(logits):
            logsm = nn.log_softmax_rows(z.astype(np.float64))
            if greedy:
                a = logsm.argmax(axis=1)
            else:
                a = nn.categorical_sample_rows(np.exp(logsm), rng)
            actions[:, i] = a
            logp += logsm[rows, a]
        return actions, logp, value.astype(np.float64)

    def evaluate(self, frames: np.ndarray, game_state: np.ndarray,
                 actions: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, EvalCache]:
        """Joint log-probs, branch-mean entropies, and values for given actions."""
        logits, value, cache = self._forward(frames, game_state)
        b = frames.shape[0]
        rows = np.arange(b)
        logp = np.zeros(b, dtype=np.float64)
        ent = np.zeros(b, dtype=np.float64)
        for i, z in enumerate(logits):
            a = np.asarray(actions[:, i], dtype=np.int64)
            if a.min() < 0 or a.max() >= self.config.branch_sizes[i]:
                raise UsageError(
                    f"action index out of range for branch {i} "
                    f"(size {self.config.branch_sizes[i]})")
            logsm = nn.log_softmax_rows(z.astype(np.float64))
            probs = np.exp(logsm)
            cache.probs.append(probs)
            h_b = nn.entropy_rows(probs)
            cache.branch_entropies.append(h_b)
            logp += logsm[rows, a]
            ent += h_b
        cache.actions = np.asarray(actions, dtype=np.int64)
        return logp, ent / len(self.heads), value.astype(np.float64), cache

    def predict_value(self, frames: np.ndarray, game_state: np.ndarray) -> np.ndarray:
        _, value, _ = self._forward(frames, game_state)
        return value.astype(np.float64)

    # -- backward --------------------------------------------------------

    def backward(self, cache: EvalCache, dlogp: np.ndarray, dentropy: np.ndarray,
                 dvalue: np.ndarray) -> None:
        """Accumulate parameter grads for upstream grads on (logp, entropy, value)."""
        dtype = self.config.dtype
        n_branches = len(self.heads)
        b = cache.actions.shape[0]
        rows = np.arange(b)
        dph = None
        for i, head in enumerate(self.heads):
            p = cache.probs[i]
            h_b = cache.branch_entropies[i]
            a = cache.actions[:, i]
            # d logp / dz = onehot - p ; d entropy / dz = -p (ln p + H)
            dz = -dlogp[:, None] * p
            dz[rows, a] += dlogp
            dz += (dentropy[:, None] / n_branches) * (-p * (np.log(p) + h_b[:, None]))
            dph_b = head.backward(cache.head_caches[i], dz.astype(dtype))
            dph = dph_b if dph is None else dph + dph_b
        dh_policy = self._back(cache.policy_path, dph)
        dv = np.asarray(dvalue, dtype=dtype)[:, None]
        dh_value = self._back(cache.value_path, dv)
        dconcat = self._back(cache.trunk, dh_policy + dh_value)
        dflat = np.ascontiguousarray(dconcat[:, :cache.flat_width])
        # the first conv's input is data, not parameters: skip its input grad
        d = self._back(cache.encoder[1:], dflat)
        first_layer, first_cache = cache.encoder[0]
        first_layer.backward(first_cache, d, need_input_grad=False)

    # -- introspection ---------------------------------------------------

    def relu_signature(self, cache: EvalCache) -> np.ndarray:
        """Concatenated ReLU masks of a forward pass, for kink detection."""
        masks = []
        for group in (cache.encoder, cache.trunk, cache.value_path, cache.policy_path):
            for layer, c in group:
                if isinstance(layer, nn.ReLU):
                    masks.append(np.asarray(c).reshape(-1))
        return np.concatenate(masks) if masks else np.zeros(0, dtype=bool)


def uniform_branch_entropy(branch_sizes: tuple[int, ...]) -> float:
    """Branch-mean entropy of uniform policies, the initialization target."""
    return sum(math.log(n) for n in branch_sizes) / len(branch_sizes)
