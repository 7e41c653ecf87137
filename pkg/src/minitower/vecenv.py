"""Lockstep vectorized environments with automatic resets.

Each slot owns an independent RNG stream for its seed/theme draws, so a
vectorized run is slot-for-slot identical to solo runs and unaffected by
what other slots do.  A done slot is reset immediately; its batch entry
carries the new episode's first observation while the terminal info is
preserved in ``infos``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .env import EnvConfig, MiniTowerEnv, Observation
from .env.layout import generate_floor
from .errors import ConfigurationError, UsageError


@dataclass(frozen=True)
class VecEnvConfig:
    num_envs: int
    seed_pool: tuple[int, ...]
    theme_pool: tuple[str, ...]
    base_rng_seed: int = 0

    def validate(self) -> None:
        if self.num_envs < 1:
            raise ConfigurationError("num_envs must be >= 1")
        if not self.seed_pool or not self.theme_pool:
            raise ConfigurationError("seed and theme pools must be non-empty")


@dataclass
class ObsBatch:
    frames: np.ndarray      # (N, stacked_frames, H, W, 3)
    game_state: np.ndarray  # (N, 2)


@dataclass
class StepBatch:
    observations: ObsBatch
    rewards: np.ndarray            # (N,)
    dones: np.ndarray              # (N,) bool
    infos: list[dict[str, Any] | None]


class VecEnv:
    """N tower instances stepped in lockstep."""

    def __init__(self, env_config: EnvConfig, vec_config: VecEnvConfig):
        vec_config.validate()
        self.env_config = env_config
        self.vec_config = vec_config
        self.num_envs = vec_config.num_envs
        self.envs = [MiniTowerEnv(env_config) for _ in range(self.num_envs)]
        base = int(vec_config.base_rng_seed) & 0xFFFFFFFFFFFFFFFF
        self._draw_rngs = [
            np.random.default_rng(np.random.SeedSequence((base, i)))
            for i in range(self.num_envs)
        ]

    def _draw(self, i: int) -> tuple[int, str]:
        rng = self._draw_rngs[i]
        seed = int(self.vec_config.seed_pool[
            int(rng.integers(len(self.vec_config.seed_pool)))])
        theme = self.vec_config.theme_pool[
            int(rng.integers(len(self.vec_config.theme_pool)))]
        return seed, theme

    def _batch(self, observations: list[Observation]) -> ObsBatch:
        return ObsBatch(
            frames=np.stack([o.frames for o in observations]),
            game_state=np.stack([o.game_state for o in observations]))

    def reset(self) -> ObsBatch:
        observations = []
        for i, env in enumerate(self.envs):
            seed, theme = self._draw(i)
            observations.append(env.reset(seed, theme))
        return self._batch(observations)

    def step(self, actions: np.ndarray) -> StepBatch:
        actions = np.asarray(actions)
        if actions.shape[:1] != (self.num_envs,):
            raise UsageError(
                f"expected {self.num_envs} actions, got shape {actions.shape}")
        observations = []
        rewards = np.zeros(self.num_envs, dtype=np.float64)
        dones = np.zeros(self.num_envs, dtype=bool)
        infos: list[dict[str, Any] | None] = [None] * self.num_envs
        for i, env in enumerate(self.envs):
            obs, reward, done, info = env.step(actions[i])
            rewards[i] = reward
            dones[i] = done
            if done:
                infos[i] = info
                seed, theme = self._draw(i)
                obs = env.reset(seed, theme)
            observations.append(obs)
        return StepBatch(observations=self._batch(observations),
                         rewards=rewards, dones=dones, infos=infos)

    def bootstrap_observation(self) -> ObsBatch:
        """Current observations without stepping, for value bootstrapping."""
        return self._batch([env._observation() for env in self.envs])

    def state_snapshot(self) -> dict[str, Any]:
        """Everything needed to restore mid-episode state on resume."""
        return {
            "envs": [self._env_state(env) for env in self.envs],
            "draw_rngs": [rng.bit_generator.state for rng in self._draw_rngs],
        }

    def restore_snapshot(self, snapshot: dict[str, Any]) -> None:
        for env, state in zip(self.envs, snapshot["envs"]):
            self._restore_env(env, state)
        for rng, state in zip(self._draw_rngs, snapshot["draw_rngs"]):
            rng.bit_generator.state = state

    @staticmethod
    def _env_state(env: MiniTowerEnv) -> dict[str, Any]:
        return {
            "seed": env.seed, "theme": env.theme,
            "floor_index": env.floor_index, "grid": env.grid.copy(),
            "pos": env.pos, "heading": env.heading, "has_key": env.has_key,
            "remaining_time": env.remaining_time, "steps": env.steps,
            "ticks": env.ticks, "episode_return": env.episode_return,
            "keys_collected": env.keys_collected,
            "doors_opened": env.doors_opened,
            "floors_completed": env.floors_completed,
            "frames": [f.copy() for f in env._frames],
            "done": env._done,
        }

    @staticmethod
    def _restore_env(env: MiniTowerEnv, state: dict[str, Any]) -> None:
        env.seed = state["seed"]
        env.theme = state["theme"]
        env.floor_index = state["floor_index"]
        # the layout is re-derivable; the mutated grid is restored directly
        floor = min(state["floor_index"], env.config.floor_cap - 1)
        env.layout = generate_floor(state["seed"], floor, env.config)
        env.grid = state["grid"].copy()
        env.pos = tuple(state["pos"])
        env.heading = state["heading"]
        env.has_key = state["has_key"]
        env.remaining_time = state["remaining_time"]
        env.steps = state["steps"]
        env.ticks = state["ticks"]
        env.episode_return = state["episode_return"]
        env.keys_collected = state["keys_collected"]
        env.doors_opened = state["doors_opened"]
        env.floors_completed = state["floors_completed"]
        env._frames.clear()
        for f in state["frames"]:
            env._frames.append(f.copy())
        env._done = state["done"]
