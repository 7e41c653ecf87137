"""Uniform-random-policy throughput benchmark, averaged over episodes."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tower import MiniTowerEnv


@dataclass(frozen=True)
class BenchEpisode:
    index: int
    seed: int
    theme: str
    steps: int
    ticks: int
    episode_return: float
    floor: int
    seconds: float


@dataclass(frozen=True)
class BenchReport:
    episodes: tuple[BenchEpisode, ...]
    total_steps: int
    total_seconds: float
    steps_per_second: float
    mean_return: float
    mean_floor: float


def run_benchmark(config, episodes: int, seed_pool, theme_pool,
                  rng_seed: int = 0) -> BenchReport:
    """Run random-policy episodes; also reports the random baseline stats."""
    env = MiniTowerEnv(config)
    rng = np.random.default_rng(np.random.SeedSequence((rng_seed, 0xBE7C)))
    rows = []
    total_steps = 0
    total_seconds = 0.0
    for i in range(episodes):
        seed = int(seed_pool[int(rng.integers(len(seed_pool)))])
        theme = theme_pool[int(rng.integers(len(theme_pool)))]
        t0 = time.perf_counter()
        env.reset(seed, theme)
        done = False
        while not done:
            action = (int(rng.integers(2)), int(rng.integers(2)),
                      int(rng.integers(3)))
            _, _, done, info = env.step(action)
        seconds = time.perf_counter() - t0
        rows.append(BenchEpisode(
            index=i, seed=seed, theme=theme, steps=env.steps, ticks=env.ticks,
            episode_return=info["episode_return"], floor=info["terminal_floor"],
            seconds=seconds))
        total_steps += env.steps
        total_seconds += seconds
    return BenchReport(
        episodes=tuple(rows),
        total_steps=total_steps,
        total_seconds=total_seconds,
        steps_per_second=total_steps / total_seconds if total_seconds > 0 else 0.0,
        mean_return=(sum(r.episode_return for r in rows) / len(rows)) if rows else 0.0,
        mean_floor=(sum(r.floor for r in rows) / len(rows)) if rows else 0.0,
    )


def write_benchmark_csv(report: BenchReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "seed", "theme", "steps", "ticks",
                         "return", "floor", "seconds", "steps_per_second"])
        for ep in report.episodes:
            writer.writerow([
                ep.index, ep.seed, ep.theme, ep.steps, ep.ticks,
                repr(ep.episode_return), ep.floor, repr(ep.seconds),
                repr(ep.steps / ep.seconds) if ep.seconds > 0 else "0.0",
            ])
