"""Held-out evaluation: seed/theme sweeps, aggregates, histograms, curves.

The protocol runs every (theme, seed, repetition) episode with a frozen
policy, sampling actions exactly like training unless the greedy flag is
set.  Eval seeds must stay disjoint from the training pool; probing
training-seed performance requires an explicit opt-in.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .env import EnvConfig, EpisodeRecorder, MiniTowerEnv
from .env.themes import THEME_NAMES, TRAINING_THEMES, theme_index
from .errors import ConfigurationError, SeedOverlapError
from .model import ActorCritic


@dataclass(frozen=True)
class EvalProtocol:
    eval_seeds: tuple[int, ...]
    repetitions: int = 3
    themes: tuple[str, ...] = THEME_NAMES
    deterministic_policy: bool = False
    rng_seed: int = 0

    def validate(self) -> None:
        if not self.eval_seeds or self.repetitions < 1 or not self.themes:
            raise ConfigurationError("evaluation protocol must be non-empty")
        for theme in self.themes:
            if theme not in THEME_NAMES:
                raise ConfigurationError(f"unknown theme {theme!r}")

    @property
    def episode_count(self) -> int:
        return len(self.eval_seeds) * self.repetitions * len(self.themes)


@dataclass(frozen=True)
class EpisodeResult:
    theme: str
    seed: int
    repetition: int
    terminal_floor: int
    episode_length: int
    episode_return: float
    termination: str
    recording: str | None


@dataclass(frozen=True)
class ThemeAggregate:
    theme: str
    episodes: int
    mean_floor: float
    floor_dev_up: float
    floor_dev_down: float
    mean_length: float
    length_std: float
    mean_return: float


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EpisodeResult, ...]
    aggregates: tuple[ThemeAggregate, ...]


def asymmetric_deviation(values: np.ndarray) -> tuple[float, float]:
    """(downward, upward) RMS deviation about the mean, each side separately."""
    values = np.asarray(values, dtype=np.float64)
    mean = values.mean()
    down = values[values < mean] - mean
    up = values[values > mean] - mean
    down_rms = float(np.sqrt(np.mean(np.square(down)))) if down.size else 0.0
    up_rms = float(np.sqrt(np.mean(np.square(up)))) if up.size else 0.0
    return down_rms, up_rms


def aggregate_theme(theme: str, rows: list[EpisodeResult]) -> ThemeAggregate:
    floors = np.array([r.terminal_floor for r in rows], dtype=np.float64)
    lengths = np.array([r.episode_length for r in rows], dtype=np.float64)
    returns = np.array([r.episode_return for r in rows], dtype=np.float64)
    dev_down, dev_up = asymmetric_deviation(floors)
    return ThemeAggregate(
        theme=theme, episodes=len(rows),
        mean_floor=float(floors.mean()),
        floor_dev_up=dev_up, floor_dev_down=dev_down,
        mean_length=float(lengths.mean()),
        length_std=float(lengths.std()),
        mean_return=float(returns.mean()))


def run_episode(model: ActorCritic, env_config: EnvConfig, seed: int, theme: str,
                rng: np.random.Generator, greedy: bool = False,
                recording_path: str | Path | None = None) -> EpisodeResult:
    env = MiniTowerEnv(env_config)
    if recording_path is not None:
        env.recorder = EpisodeRecorder(recording_path, seed, theme,
                                       env_config.digest())
    obs = env.reset(seed, theme)
    done = False
    info: dict = {}
    while not done:
        actions, _, _ = model.act(obs.frames[None], obs.game_state[None], rng,
                                  greedy=greedy)
        obs, _, done, info = env.step(actions[0])
    if env.recorder is not None:
        env.recorder.close()
        env.recorder = None
    return EpisodeResult(
        theme=theme, seed=seed, repetition=-1,
        terminal_floor=info["terminal_floor"],
        episode_length=info["episode_length"],
        episode_return=info["episode_return"],
        termination=info["termination"],
        recording=str(recording_path) if recording_path is not None else None)


def evaluate(model: ActorCritic, env_config: EnvConfig, protocol: EvalProtocol,
             training_seed_pool, recordings_dir: str | Path | None = None,
             allow_training_seeds: bool = False) -> EvalReport:
    """Run the full protocol; refuses eval seeds that overlap training seeds."""
    protocol.validate()
    overlap = set(protocol.eval_seeds) & set(int(s) for s in training_seed_pool)
    if overlap and not allow_training_seeds:
        raise SeedOverlapError(
            f"evaluation seeds {sorted(overlap)} appear in the training pool")
    if recordings_dir is not None:
        recordings_dir = Path(recordings_dir)
        recordings_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for theme in protocol.themes:
        for seed in protocol.eval_seeds:
            for rep in range(protocol.repetitions):
                rng = np.random.default_rng(np.random.SeedSequence(
                    (protocol.rng_seed, theme_index(theme), int(seed), rep)))
                rec_path = None
                if recordings_dir is not None:
                    rec_path = recordings_dir / f"{theme}_s{seed}_r{rep}.rec"
                result = run_episode(model, env_config, int(seed), theme, rng,
                                     greedy=protocol.deterministic_policy,
                                     recording_path=rec_path)
                rows.append(EpisodeResult(**{**result.__dict__,
                                             "repetition": rep}))
    aggregates = tuple(
        aggregate_theme(t, [r for r in rows if r.theme == t])
        for t in protocol.themes)
    return EvalReport(rows=tuple(rows), aggregates=aggregates)


def termination_histogram(rows, floor_cap: int,
                          training_themes=TRAINING_THEMES) -> dict[str, np.ndarray]:
    """Counts of terminal floors 0..floor_cap, split train/held-out themes."""
    if not rows:
        raise ConfigurationError("histogram needs at least one episode")
    counts = {
        "training": np.zeros(floor_cap + 1, dtype=np.int64),
        "heldout": np.zeros(floor_cap + 1, dtype=np.int64),
    }
    for row in rows:
        split = "training" if row.theme in training_themes else "heldout"
        counts[split][row.terminal_floor] += 1
    return counts


# -- file output -----------------------------------------------------------

EPISODE_COLUMNS = ["theme", "seed", "repetition", "terminal_floor",
                   "episode_length", "episode_return", "termination",
                   "recording"]
AGGREGATE_COLUMNS = ["theme", "episodes", "mean_floor", "floor_dev_up",
                     "floor_dev_down", "mean_length", "length_std",
                     "mean_return"]


def write_eval_report(report: EvalReport, out_dir: str | Path) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    episodes_path = out_dir / "episodes.csv"
    with open(episodes_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EPISODE_COLUMNS)
        for r in report.rows:
            writer.writerow([r.theme, r.seed, r.repetition, r.terminal_floor,
                             r.episode_length, repr(r.episode_return),
                             r.termination, r.recording or ""])
    aggregate_path = out_dir / "aggregate.csv"
    with open(aggregate_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_COLUMNS)
        for a in report.aggregates:
            writer.writerow([a.theme, a.episodes, repr(a.mean_floor),
                             repr(a.floor_dev_up), repr(a.floor_dev_down),
                             repr(a.mean_length), repr(a.length_std),
                             repr(a.mean_return)])
    return {"episodes": episodes_path, "aggregate": aggregate_path}


def write_histogram_csv(counts: dict[str, np.ndarray], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["floor", "training_themes", "heldout_themes"])
        for floor in range(len(counts["training"])):
            writer.writerow([floor, int(counts["training"][floor]),
                             int(counts["heldout"][floor])])


INTERVAL_COLUMNS = ["update", "theme", "episodes", "mean_floor", "floor_dev_up",
                    "floor_dev_down", "mean_length", "length_std", "mean_return"]


def append_interval_rows(path: str | Path, update: int,
                         aggregates) -> None:
    """Accumulate per-eval-interval aggregates for the learning curves."""
    path = Path(path)
    new_file = not path.exists()
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(INTERVAL_COLUMNS)
        for a in aggregates:
            writer.writerow([update, a.theme, a.episodes, repr(a.mean_floor),
                             repr(a.floor_dev_up), repr(a.floor_dev_down),
                             repr(a.mean_length), repr(a.length_std),
                             repr(a.mean_return)])


def read_interval_rows(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        out = []
        for row in csv.DictReader(fh):
            parsed = dict(row)
            for key in INTERVAL_COLUMNS:
                if key not in ("theme",):
                    parsed[key] = float(row[key])
            out.append(parsed)
        return out


def curve_series(interval_rows: list[dict], metric: str, band: str) -> dict:
    """Per-theme (updates, mean, lower, upper) series for plotting/export.

    ``band`` selects the deviation rule: "asymmetric" pairs the metric with
    its up/down RMS deviations, "std" uses a symmetric standard deviation.
    """
    series = {}
    themes = sorted({row["theme"] for row in interval_rows},
                    key=lambda t: THEME_NAMES.index(t))
    for theme in themes:
        rows = [r for r in interval_rows if r["theme"] == theme]
        rows.sort(key=lambda r: r["update"])
        x = np.array([r["update"] for r in rows])
        mean = np.array([r[metric] for r in rows])
        if band == "asymmetric":
            lo = mean - np.array([r["floor_dev_down"] for r in rows])
            hi = mean + np.array([r["floor_dev_up"] for r in rows])
        else:
            std = np.array([r["length_std"] for r in rows])
            lo, hi = mean - std, mean + std
        series[theme] = (x, mean, lo, hi)
    return series


def write_curve_csv(series: dict, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theme", "update", "mean", "lower", "upper"])
        for theme, (x, mean, lo, hi) in series.items():
            for i in range(len(x)):
                writer.writerow([theme, int(x[i]), repr(float(mean[i])),
                                 repr(float(lo[i])), repr(float(hi[i]))])
