"""PPO: rollout collection, GAE, clipped objectives, annealed coefficients.

The loss is the clipped policy surrogate plus ``value_coef`` times the
clipped value error minus ``entropy_coef`` times the branch-mean entropy.
Gradients with respect to the network outputs (joint log-prob, entropy,
value) are computed in closed form here and pushed through the model's
backward pass.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigurationError, TrainingError, UsageError
from .model import ActorCritic
from .vecenv import ObsBatch, VecEnv

ADV_STD_EPSILON = 1e-8


@dataclass(frozen=True)
class PPOConfig:
    discount: float = 0.99
    gae_lambda: float = 0.95
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    total_updates: int = 2000
    epochs: int = 4
    num_envs: int = 16
    trajectory_length: int = 8192
    # False: trajectory_length is the total batch across envs (8192 = 16 x 512);
    # True: it counts steps per env
    trajectory_per_env: bool = False
    minibatches: int = 4
    learning_rate: float = 3.25e-4
    clip_range: float = 0.2
    anneal_floor: float = 0.0
    advantage_normalization: bool = True
    gradient_clip: float = 0.0  # 0 disables
    value_clip: bool = True
    eval_interval: int = 200
    checkpoint_interval: int = 200

    @property
    def horizon(self) -> int:
        """Steps collected per environment per update."""
        if self.trajectory_per_env:
            return self.trajectory_length
        return self.trajectory_length // self.num_envs

    @property
    def batch_size(self) -> int:
        return self.horizon * self.num_envs

    def validate(self) -> None:
        if not (0.0 <= self.discount <= 1.0 and 0.0 <= self.gae_lambda <= 1.0):
            raise ConfigurationError("discount and gae_lambda must lie in [0, 1]")
        if self.anneal_floor < 0:
            raise ConfigurationError("anneal_floor must be >= 0")
        if not self.trajectory_per_env and self.trajectory_length % self.num_envs:
            raise ConfigurationError(
                f"trajectory_length {self.trajectory_length} is not divisible by "
                f"num_envs {self.num_envs}")
        if self.batch_size % self.minibatches:
            raise ConfigurationError(
                f"minibatches {self.minibatches} does not divide the batch size "
                f"{self.batch_size}")
        if self.total_updates < 1 or self.epochs < 1 or self.num_envs < 1:
            raise ConfigurationError("counts must be positive")


def linear_anneal(initial: float, progress: float, floor: float = 0.0) -> float:
    """Linear decay from ``initial`` at progress 0, bounded below by ``floor``."""
    if not 0.0 <= progress <= 1.0:
        raise UsageError(f"progress {progress} outside [0, 1]")
    return max(floor, initial * (1.0 - progress))


class RolloutBuffer:
    """Fixed-horizon storage of one update's transitions, laid out (T, N, ...)."""

    def __init__(self, num_envs: int, horizon: int, frame_shape: tuple[int, ...],
                 game_state_dims: int, n_branches: int, dtype: np.dtype):
        t, n = horizon, num_envs
        self.horizon = horizon
        self.num_envs = num_envs
        self.frames = np.zeros((t, n) + frame_shape, dtype=dtype)
        self.game_state = np.zeros((t, n, game_state_dims), dtype=dtype)
        self.actions = np.zeros((t, n, n_branches), dtype=np.int64)
        self.log_probs = np.zeros((t, n), dtype=np.float64)
        self.values = np.zeros((t, n), dtype=np.float64)
        self.rewards = np.zeros((t, n), dtype=np.float64)
        self.dones = np.zeros((t, n), dtype=bool)
        self.bootstrap = np.zeros(n, dtype=np.float64)
        self.advantages: np.ndarray | None = None
        self.returns: np.ndarray | None = None
        self.pos = 0

    @property
    def full(self) -> bool:
        return self.pos == self.horizon

    def add(self, obs: ObsBatch, actions: np.ndarray, log_probs: np.ndarray,
            values: np.ndarray, rewards: np.ndarray, dones: np.ndarray) -> None:
        if self.full:
            raise UsageError("rollout buffer already full")
        t = self.pos
        self.frames[t] = obs.frames
        self.game_state[t] = obs.game_state
        self.actions[t] = actions
        self.log_probs[t] = log_probs
        self.values[t] = values
        self.rewards[t] = rewards
        self.dones[t] = dones
        self.pos += 1

    def compute_gae(self, discount: float, gae_lambda: float) -> None:
        if not self.full:
            raise UsageError("rollout buffer not full; cannot compute advantages")
        self.advantages, self.returns = compute_gae(
            self.rewards, self.values, self.dones, self.bootstrap,
            discount, gae_lambda)

    def minibatch(self, indices: np.ndarray) -> dict[str, np.ndarray]:
        t, n = self.horizon, self.num_envs
        flat = indices

        def take(arr):
            return arr.reshape((t * n,) + arr.shape[2:])[flat]

        return {
            "frames": take(self.frames),
            "game_state": take(self.game_state),
            "actions": take(self.actions),
            "old_log_probs": take(self.log_probs),
            "old_values": take(self.values),
            "advantages": take(self.advantages),
            "returns": take(self.returns),
        }


def compute_gae(rewards: np.ndarray, values: np.ndarray, dones: np.ndarray,
                bootstrap: np.ndarray, discount: float,
                gae_lambda: float) -> tuple[np.ndarray, np.ndarray]:
    """Backward GAE recursion over (T, N) arrays; done flags cut the credit."""
    t_len = rewards.shape[0]
    advantages = np.zeros_like(rewards)
    running = np.zeros_like(bootstrap)
    next_values = bootstrap
    for t in range(t_len - 1, -1, -1):
        live = 1.0 - dones[t]
        delta = rewards[t] + discount * next_values * live - values[t]
        running = delta + discount * gae_lambda * live * running
        advantages[t] = running
        next_values = values[t]
    return advantages, advantages + values


def collect_rollout(model: ActorCritic, vec: VecEnv, obs: ObsBatch, horizon: int,
                    sample_rng: np.random.Generator,
                    buffer_dtype: np.dtype) -> tuple[RolloutBuffer, ObsBatch, list]:
    """Roll the policy for ``horizon`` steps per env; returns the next obs too."""
    cfg = model.config
    buffer = RolloutBuffer(
        vec.num_envs, horizon,
        (cfg.stacked_frames, cfg.frame_height, cfg.frame_width, cfg.color_channels),
        cfg.game_state_dims, len(cfg.branch_sizes), buffer_dtype)
    episode_infos: list[dict[str, Any]] = []
    for _ in range(horizon):
        actions, log_probs, values = model.act(obs.frames, obs.game_state,
                                               sample_rng)
        batch = vec.step(actions)
        buffer.add(obs, actions, log_probs, values, batch.rewards, batch.dones)
        episode_infos.extend(info for info in batch.infos if info is not None)
        obs = batch.observations
    buffer.bootstrap = model.predict_value(obs.frames, obs.game_state)
    return buffer, obs, episode_infos


def ppo_loss_and_grads(model: ActorCritic, mb: dict[str, np.ndarray],
                       clip_range: float, value_coef: float, entropy_coef: float,
                       normalize_advantages: bool = True,
                       value_clip: bool = True) -> dict[str, float]:
    """Accumulate gradients of the PPO loss on one minibatch; returns stats."""
    adv = mb["advantages"]
    if normalize_advantages:
        adv = (adv - adv.mean()) / (adv.std() + ADV_STD_EPSILON)

    log_probs, entropy, values, cache = model.evaluate(
        mb["frames"], mb["game_state"], mb["actions"])
    ratio = np.exp(log_probs - mb["old_log_probs"])
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip_range, 1.0 + clip_range) * adv
    objective = np.minimum(unclipped, clipped)
    policy_loss = -objective.mean()

    if value_clip:
        v_clipped = mb["old_values"] + np.clip(
            values - mb["old_values"], -clip_range, clip_range)
        sq = np.square(values - mb["returns"])
        sq_clipped = np.square(v_clipped - mb["returns"])
        value_loss = np.maximum(sq, sq_clipped).mean()
        value_active = sq >= sq_clipped
    else:
        value_loss = np.square(values - mb["returns"]).mean()
        value_active = np.ones_like(values, dtype=bool)

    entropy_mean = entropy.mean()
    loss = policy_loss + value_coef * value_loss - entropy_coef * entropy_mean
    if not np.isfinite(loss):
        raise TrainingError(
            f"non-finite loss (policy {policy_loss}, value {value_loss}, "
            f"entropy {entropy_mean})")

    m = float(len(adv))
    dlogp = -(ratio * adv) * (unclipped <= clipped) / m
    dvalue = value_coef * 2.0 * (values - mb["returns"]) * value_active / m
    dentropy = np.full(len(adv), -entropy_coef / m)
    model.backward(cache, dlogp, dentropy, dvalue)

    return {
        "loss": float(loss),
        "policy_loss": float(policy_loss),
        "value_loss": float(value_loss),
        "entropy": float(entropy_mean),
        "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > clip_range)),
    }


def clip_gradient_norm(model: ActorCritic, max_norm: float) -> float:
    """Scale all grads so their global L2 norm is at most ``max_norm``."""
    total = 0.0
    params = model.params()
    for p in params.values():
        total += float(np.square(p.grad).sum())
    norm = np.sqrt(total)
    if norm > max_norm > 0:
        scale = max_norm / norm
        for p in params.values():
            p.grad *= scale
    return float(norm)


@dataclass
class TrainStats:
    """One row per PPO update, mirrored into the stats CSV."""

    update: int
    lr: float
    clip_range: float
    entropy_coef: float
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    mean_return: float
    mean_length: float
    mean_floor: float

    @classmethod
    def csv_header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def csv_row(self) -> list[str]:
        out = [str(self.update)]
        for f in fields(self)[1:]:
            out.append(repr(getattr(self, f.name)))
        return out


def ppo_update(model: ActorCritic, optimizer, buffer: RolloutBuffer,
               config: PPOConfig, progress: float,
               shuffle_rng: np.random.Generator) -> dict[str, float]:
    """Epoch/minibatch optimization over a full buffer at annealed settings."""
    if buffer.advantages is None:
        raise UsageError("compute_gae must run before the update")
    lr = linear_anneal(config.learning_rate, progress, config.anneal_floor)
    clip = linear_anneal(config.clip_range, progress, config.anneal_floor)
    ent_coef = linear_anneal(config.entropy_coef, progress, config.anneal_floor)

    batch = buffer.horizon * buffer.num_envs
    mb_size = batch // config.minibatches
    agg: dict[str, float] = {}
    steps = 0
    for _ in range(config.epochs):
        order = shuffle_rng.permutation(batch)
        for k in range(config.minibatches):
            idx = order[k * mb_size:(k + 1) * mb_size]
            model.zero_grad()
            stats = ppo_loss_and_grads(
                model, buffer.minibatch(idx), clip, config.value_coef, ent_coef,
                normalize_advantages=config.advantage_normalization,
                value_clip=config.value_clip)
            if config.gradient_clip > 0:
                clip_gradient_norm(model, config.gradient_clip)
            optimizer.step(lr)
            for key, val in stats.items():
                agg[key] = agg.get(key, 0.0) + val
            steps += 1
    for p in model.params().values():
        p.check_finite("parameters after update")
    out = {key: val / steps for key, val in agg.items()}
    out.update(lr=lr, clip_range=clip, entropy_coef=ent_coef)
    return out


def write_stats_csv(path: str | Path, rows: list[TrainStats]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TrainStats.csv_header())
        for row in rows:
            writer.writerow(row.csv_row())


def read_stats_csv(path: str | Path) -> list[dict[str, float]]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()}
                for row in csv.DictReader(fh)]
