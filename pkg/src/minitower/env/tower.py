"""The tower environment: frame skip, frame stack, rewards, terminations.

One action is applied for ``frame_skip`` internal ticks.  Within a tick the
agent first rotates, then moves one cell in its heading if the target is
passable.  Standing on a gap cell at the end of a tick without having jumped
that tick ends the episode; jumping every tick lets the agent cross gap
bands cell by cell, so a two-wide band needs two consecutive jumps.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, fields
from typing import Any

import numpy as np

from ..errors import UsageError
from . import layout
from .render import DIR_VECTORS, EAST, render_frame
from .themes import THEME_NAMES

REWARD_FLOOR = 1.0
REWARD_KEY = 0.1
REWARD_DOOR = 0.1

MOVE_NONE, MOVE_FORWARD = 0, 1
JUMP_NONE, JUMP_JUMP = 0, 1
ROTATE_NONE, ROTATE_LEFT, ROTATE_RIGHT = 0, 1, 2
BRANCH_SIZES = (2, 2, 3)


@dataclass(frozen=True)
class EnvConfig:
    frame_height: int = 64
    frame_width: int = 64
    view_radius: int = 3
    stacked_frames: int = 3
    frame_skip: int = 2
    floor_cap: int = 10
    key_intro_floor: int = 2
    gap_intro_floor: int = 4
    max_rooms: int = 4
    initial_time: int = 500
    floor_time_bonus: int = 250
    orb_time_bonus: int = 50
    double_normalize: bool = True
    max_gen_retries: int = 20
    obs_precision: str = "float64"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(self.obs_precision)

    def digest(self) -> bytes:
        """16-byte hash of the dynamics-relevant fields, for recordings."""
        text = ",".join(f"{f.name}={getattr(self, f.name)}" for f in fields(self))
        return hashlib.md5(text.encode()).digest()


@dataclass
class Observation:
    """Stacked normalized frames (oldest to newest) plus the game-state vector."""

    frames: np.ndarray      # (stacked_frames, H, W, 3)
    game_state: np.ndarray  # (has_key as 0/1, remaining_time / initial_time)


def normalize_frame(frame: np.ndarray, config: EnvConfig) -> np.ndarray:
    """Byte frame to floats; the double-division quirk is on by default."""
    scale = 1.0 / 255.0 / 255.0 if config.double_normalize else 1.0 / 255.0
    return np.multiply(frame, scale, dtype=config.dtype)


def wrap_observation(raw_frames, has_key: bool, remaining_time: int,
                     config: EnvConfig) -> Observation:
    """Stack the newest frames, padding by repeating the oldest one."""
    frames = [normalize_frame(f, config) for f in raw_frames][-config.stacked_frames:]
    while len(frames) < config.stacked_frames:
        frames.insert(0, frames[0])
    game_state = np.array(
        [1.0 if has_key else 0.0, remaining_time / config.initial_time],
        dtype=config.dtype)
    return Observation(frames=np.stack(frames), game_state=game_state)


class MiniTowerEnv:
    """Single procedural tower instance; one seeded episode per reset."""

    def __init__(self, config: EnvConfig):
        self.config = config
        self.recorder = None
        self._done = True
        self._frames: deque = deque(maxlen=config.stacked_frames)

    # -- episode state ----------------------------------------------------

    def reset(self, seed: int, theme: str) -> Observation:
        if theme not in THEME_NAMES:
            raise UsageError(f"unknown theme {theme!r}")
        self.seed = int(seed)
        self.theme = theme
        self.floor_index = 0
        self.has_key = False
        self.remaining_time = self.config.initial_time
        self.heading = EAST
        self.steps = 0
        self.ticks = 0
        self.episode_return = 0.0
        self.keys_collected = 0
        self.doors_opened = 0
        self.floors_completed = 0
        self._done = False
        self._enter_floor(0)
        self._frames.clear()
        frame = normalize_frame(self._render(), self.config)
        for _ in range(self.config.stacked_frames):
            self._frames.append(frame)
        if self.recorder is not None:
            self._record((MOVE_NONE, JUMP_NONE, ROTATE_NONE), 0.0, False,
                         self.floor_index, self.pos)
        return self._observation()

    def _enter_floor(self, floor_index: int) -> None:
        self.layout = layout.generate_floor(self.seed, floor_index, self.config)
        self.grid = self.layout.grid.copy()
        self.pos = self.layout.start
        self.heading = EAST
        self.has_key = False

    @property
    def done(self) -> bool:
        return self._done

    # -- stepping ----------------------------------------------------------

    def step(self, action) -> tuple[Observation, float, bool, dict[str, Any]]:
        if self._done:
            raise UsageError("step called on a finished episode; call reset")
        move, jump, rotate = (int(action[0]), int(action[1]), int(action[2]))
        if not (0 <= move < 2 and 0 <= jump < 2 and 0 <= rotate < 3):
            raise UsageError(f"action {action!r} outside the (2, 2, 3) branches")

        reward = 0.0
        termination = None
        for _ in range(self.config.frame_skip):
            tick_reward, termination = self._tick(move, jump, rotate)
            reward += tick_reward
            if termination is not None:
                self._done = True
                break
        self.steps += 1
        self.episode_return += reward

        self._frames.append(normalize_frame(self._render(), self.config))
        obs = self._observation()

        info: dict[str, Any] = {
            "floor": self.floor_index,
            "remaining_time": self.remaining_time,
            "has_key": self.has_key,
        }
        if self._done:
            info.update(
                terminal_floor=self.floor_index,
                episode_length=self.steps,
                episode_return=self.episode_return,
                termination=termination,
                keys_collected=self.keys_collected,
                doors_opened=self.doors_opened,
                floors_completed=self.floors_completed,
                seed=self.seed,
                theme=self.theme,
            )
        return obs, reward, self._done, info

    def _tick(self, move: int, jump: int, rotate: int) -> tuple[float, str | None]:
        if rotate == ROTATE_LEFT:
            self.heading = (self.heading - 1) % 4
        elif rotate == ROTATE_RIGHT:
            self.heading = (self.heading + 1) % 4

        reward = 0.0
        completed_floor = None  # (floor index, exit cell) when an exit was reached
        completed_run = False

        if move == MOVE_FORWARD:
            dr, dc = DIR_VECTORS[self.heading]
            nr, nc = self.pos[0] + dr, self.pos[1] + dc
            kind = self.grid[nr, nc]
            blocked = kind == layout.WALL or (
                kind == layout.LOCKED_DOOR and not self.has_key)
            if not blocked:
                self.pos = (nr, nc)
                if kind == layout.LOCKED_DOOR:
                    self.grid[nr, nc] = layout.DOOR
                    self.has_key = False
                    self.doors_opened += 1
                    reward += REWARD_DOOR
                elif kind == layout.KEY:
                    self.grid[nr, nc] = layout.OPEN
                    self.has_key = True
                    self.keys_collected += 1
                    reward += REWARD_KEY
                elif kind == layout.ORB:
                    self.grid[nr, nc] = layout.OPEN
                    self.remaining_time += self.config.orb_time_bonus
                elif kind == layout.EXIT:
                    reward += REWARD_FLOOR
                    self.floors_completed += 1
                    self.remaining_time += self.config.floor_time_bonus
                    completed_floor = (self.floor_index, self.pos)
                    self.floor_index += 1
                    if self.floor_index >= self.config.floor_cap:
                        completed_run = True
                    else:
                        self._enter_floor(self.floor_index)

        termination = None
        if completed_run:
            termination = "completed"
        elif self.grid[self.pos] == layout.GAP and jump == JUMP_NONE:
            termination = "fell"

        self.ticks += 1
        self.remaining_time -= 1
        if termination is None and self.remaining_time <= 0:
            termination = "timeout"
        done = termination is not None

        if self.recorder is not None:
            action = (move, jump, rotate)
            if completed_floor is not None:
                # attribute the reward to the exit cell of the finished floor;
                # a zero-reward entry record opens the next floor's path
                floor, exit_pos = completed_floor
                self._record(action, reward, completed_run, floor, exit_pos)
                if not completed_run:
                    self._record(action, 0.0, False, self.floor_index, self.pos)
            else:
                self._record(action, reward, done, self.floor_index, self.pos)
        return reward, termination

    def _record(self, action, reward: float, done: bool, floor: int,
                pos: tuple[int, int]) -> None:
        self.recorder.record(floor=floor, row=pos[0], col=pos[1],
                             heading=self.heading, move=action[0],
                             jump=action[1], rotate=action[2],
                             reward=reward, done=done)

    # -- observations -------------------------------------------------------

    def _render(self) -> np.ndarray:
        return render_frame(self.grid, self.pos, self.heading, self.theme,
                            self.config)

    def _observation(self) -> Observation:
        # the deque already holds normalized frames; this must stay equivalent
        # to wrap_observation over the raw history (pinned by a test)
        game_state = np.array(
            [1.0 if self.has_key else 0.0,
             self.remaining_time / self.config.initial_time],
            dtype=self.config.dtype)
        return Observation(frames=np.stack(self._frames), game_state=game_state)
