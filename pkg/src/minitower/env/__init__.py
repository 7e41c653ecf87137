"""Procedural tower environment: generation, themes, rendering, stepping."""

from .bench import BenchReport, run_benchmark, write_benchmark_csv
from .layout import FloorLayout, generate_floor, solvable
from .recording import EpisodeRecorder, Recording, TickRecord, read_recording
from .render import render_frame
from .themes import HELDOUT_THEMES, THEME_NAMES, THEMES, TRAINING_THEMES
from .tower import (
    BRANCH_SIZES,
    EnvConfig,
    MiniTowerEnv,
    Observation,
    normalize_frame,
    wrap_observation,
)

__all__ = [
    "BRANCH_SIZES",
    "BenchReport",
    "EnvConfig",
    "EpisodeRecorder",
    "FloorLayout",
    "HELDOUT_THEMES",
    "MiniTowerEnv",
    "Observation",
    "Recording",
    "THEMES",
    "THEME_NAMES",
    "TRAINING_THEMES",
    "TickRecord",
    "generate_floor",
    "normalize_frame",
    "read_recording",
    "render_frame",
    "run_benchmark",
    "solvable",
    "wrap_observation",
    "write_benchmark_csv",
]
