from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from minitower.model import ActorCritic, ModelConfig


TINY_MODEL_CONFIG = ModelConfig(
    frame_height=16,
    frame_width=16,
    stacked_frames=2,
    hidden_size=16,
    branch_sizes=(2, 3),
    conv_layers=((3, 4, 2), (4, 3, 2)),
    precision="float64",
)


def make_tiny_model(seed: int = 0) -> ActorCritic:
    return ActorCritic(TINY_MODEL_CONFIG, np.random.default_rng(seed))


def random_obs(config: ModelConfig, batch: int, rng: np.random.Generator,
               scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    frames = rng.random(
        (batch, config.stacked_frames, config.frame_height, config.frame_width,
         config.color_channels)) * scale
    game_state = np.column_stack(
        [rng.integers(0, 2, batch).astype(np.float64), rng.random(batch)])
    return frames, game_state


@pytest.fixture
def tiny_model() -> ActorCritic:
    return make_tiny_model()
