"""Training orchestration: collect / GAE / update loop, checkpoints, eval.

A run directory is self-describing: it holds the resolved config, the stats
CSV (one row per update), periodic checkpoints (parameter TLCK, optimizer
TLCK, and a full-fidelity resume sidecar), and per-interval eval output.
"""

from __future__ import annotations

import pickle
from pathlib import Path

import numpy as np

from . import nn
from .charts import histogram_chart, line_plot_with_bands
from .config import RunConfig, derive_streams
from .errors import ConfigurationError
from .evaluation import (
    append_interval_rows,
    curve_series,
    evaluate,
    read_interval_rows,
    termination_histogram,
    write_curve_csv,
    write_eval_report,
    write_histogram_csv,
)
from .model import ActorCritic
from .ppo import TrainStats, collect_rollout, ppo_update
from .vecenv import VecEnv, VecEnvConfig

CHECKPOINT_DIR = "checkpoints"
STATS_FILE = "stats.csv"
INTERVALS_FILE = "eval/intervals.csv"


def checkpoint_paths(run_dir: Path, update: int) -> dict[str, Path]:
    base = run_dir / CHECKPOINT_DIR / f"update_{update:06d}"
    return {
        "params": base.with_suffix(".tlck"),
        "optim": base.with_suffix(".optim.tlck"),
        "state": base.with_suffix(".state.pkl"),
    }


def latest_checkpoint(run_dir: Path) -> int | None:
    folder = run_dir / CHECKPOINT_DIR
    if not folder.is_dir():
        return None
    updates = [int(p.stem.split("_")[1].split(".")[0])
               for p in folder.glob("update_*.state.pkl")]
    return max(updates) if updates else None


class Trainer:
    """Owns the model, optimizer, vectorized envs, and all run artifacts."""

    def __init__(self, config: RunConfig, run_dir: str | Path | None = None,
                 verbose: bool = True):
        config.validate()
        self.config = config
        self.run_dir = Path(run_dir if run_dir is not None else config.run_dir)
        self.verbose = verbose

        streams = derive_streams(config.master_seed)
        self.model = ActorCritic(config.model_config,
                                 np.random.default_rng(streams.init))
        self.optimizer = nn.Adam(self.model.params())
        ppo = config.ppo_config
        self.vec = VecEnv(config.env_config, VecEnvConfig(
            num_envs=ppo.num_envs, seed_pool=config.training_seeds,
            theme_pool=config.training_themes, base_rng_seed=streams.vec))
        self.sample_rng = np.random.default_rng(streams.sampler)
        self.shuffle_rng = np.random.default_rng(streams.shuffle)
        self.update_index = 0
        self.obs = None
        self._buffer_dtype = np.dtype(config.precision)

    # -- main loop -----------------------------------------------------------

    def train(self, resume: bool = False, stop_after: int | None = None) -> Path:
        """Run updates until total_updates (or ``stop_after``, checkpointed)."""
        ppo = self.config.ppo_config
        self.run_dir.mkdir(parents=True, exist_ok=True)
        (self.run_dir / CHECKPOINT_DIR).mkdir(exist_ok=True)
        stats_path = self.run_dir / STATS_FILE

        if resume:
            update = latest_checkpoint(self.run_dir)
            if update is None:
                raise ConfigurationError(
                    f"no checkpoint to resume from in {self.run_dir}")
            self.load_resume_state(checkpoint_paths(self.run_dir, update)["state"])
            self._truncate_stats(stats_path)
        else:
            self.config.save(self.run_dir / "config.cfg")
            self.obs = self.vec.reset()
            with open(stats_path, "w", newline="") as fh:
                fh.write(",".join(TrainStats.csv_header()) + "\n")

        while self.update_index < ppo.total_updates:
            if stop_after is not None and self.update_index >= stop_after:
                break
            progress = self.update_index / ppo.total_updates
            buffer, self.obs, infos = collect_rollout(
                self.model, self.vec, self.obs, ppo.horizon, self.sample_rng,
                self._buffer_dtype)
            buffer.compute_gae(ppo.discount, ppo.gae_lambda)
            stats = ppo_update(self.model, self.optimizer, buffer, ppo,
                               progress, self.shuffle_rng)
            self.update_index += 1
            row = self._stats_row(stats, infos)
            with open(stats_path, "a", newline="") as fh:
                fh.write(",".join(row.csv_row()) + "\n")

            if self.verbose and (self.update_index % 50 == 0
                                 or self.update_index == ppo.total_updates):
                print(f"update {self.update_index}/{ppo.total_updates} "
                      f"return={row.mean_return:.3f} floor={row.mean_floor:.2f} "
                      f"entropy={row.entropy:.3f}", flush=True)
            if ppo.checkpoint_interval and \
                    self.update_index % ppo.checkpoint_interval == 0:
                self.save_checkpoint()
            if ppo.eval_interval and self.update_index % ppo.eval_interval == 0:
                self.run_interval_eval()

        if not ppo.checkpoint_interval or \
                self.update_index % ppo.checkpoint_interval:
            self.save_checkpoint()
        if self.update_index >= ppo.total_updates:
            self.export_curves()
        return self.run_dir

    def _stats_row(self, stats: dict, infos: list[dict]) -> TrainStats:
        if infos:
            mean_return = float(np.mean([i["episode_return"] for i in infos]))
            mean_length = float(np.mean([i["episode_length"] for i in infos]))
            mean_floor = float(np.mean([i["terminal_floor"] for i in infos]))
        else:
            mean_return = mean_length = mean_floor = float("nan")
        return TrainStats(
            update=self.update_index, lr=stats["lr"],
            clip_range=stats["clip_range"], entropy_coef=stats["entropy_coef"],
            policy_loss=stats["policy_loss"], value_loss=stats["value_loss"],
            entropy=stats["entropy"], clip_fraction=stats["clip_fraction"],
            mean_return=mean_return, mean_length=mean_length,
            mean_floor=mean_floor)

    def _truncate_stats(self, stats_path: Path) -> None:
        if not stats_path.exists():
            with open(stats_path, "w", newline="") as fh:
                fh.write(",".join(TrainStats.csv_header()) + "\n")
            return
        lines = stats_path.read_text().splitlines()
        kept = [lines[0]]
        for line in lines[1:]:
            if line and int(line.split(",", 1)[0]) <= self.update_index:
                kept.append(line)
        stats_path.write_text("\n".join(kept) + "\n")

    # -- checkpointing ---------------------------------------------------------

    def save_checkpoint(self) -> dict[str, Path]:
        paths = checkpoint_paths(self.run_dir, self.update_index)
        self.model.save(paths["params"])
        nn.save_tensors(paths["optim"], self.optimizer.state_arrays())
        state = {
            "update_index": self.update_index,
            "params": self.model.param_arrays(),
            "adam_m": {k: v.copy() for k, v in self.optimizer.m.items()},
            "adam_v": {k: v.copy() for k, v in self.optimizer.v.items()},
            "adam_step": self.optimizer.step_count,
            "vec": self.vec.state_snapshot(),
            "sample_rng": self.sample_rng.bit_generator.state,
            "shuffle_rng": self.shuffle_rng.bit_generator.state,
        }
        with open(paths["state"], "wb") as fh:
            pickle.dump(state, fh)
        return paths

    def load_resume_state(self, state_path: str | Path) -> None:
        with open(state_path, "rb") as fh:
            state = pickle.load(fh)
        self.update_index = state["update_index"]
        self.model.set_params(state["params"])
        for name in self.optimizer.m:
            self.optimizer.m[name][...] = state["adam_m"][name]
            self.optimizer.v[name][...] = state["adam_v"][name]
        self.optimizer.step_count = state["adam_step"]
        self.vec.restore_snapshot(state["vec"])
        self.sample_rng.bit_generator.state = state["sample_rng"]
        self.shuffle_rng.bit_generator.state = state["shuffle_rng"]
        self.obs = self.vec.bootstrap_observation()

    # -- evaluation ------------------------------------------------------------

    def run_interval_eval(self) -> None:
        out_dir = self.run_dir / "eval" / f"update_{self.update_index:06d}"
        report = evaluate(
            self.model, self.config.env_config, self.config.eval_protocol,
            self.config.training_seeds,
            recordings_dir=out_dir / "recordings")
        write_eval_report(report, out_dir)
        counts = termination_histogram(report.rows,
                                       self.config.env_config.floor_cap)
        write_histogram_csv(counts, out_dir / "histogram.csv")
        histogram_chart(counts, out_dir / "histogram.ppm",
                        out_dir / "histogram.png")
        append_interval_rows(self.run_dir / INTERVALS_FILE, self.update_index,
                             report.aggregates)
        if self.verbose:
            by_theme = {a.theme: a.mean_floor for a in report.aggregates}
            print(f"eval @ {self.update_index}: " + "  ".join(
                f"{t}={f:.2f}" for t, f in by_theme.items()), flush=True)

    def export_curves(self) -> None:
        intervals = self.run_dir / INTERVALS_FILE
        if not intervals.exists():
            return
        rows = read_interval_rows(intervals)
        out = self.run_dir / "eval"
        floor_series = curve_series(rows, "mean_floor", band="asymmetric")
        write_curve_csv(floor_series, out / "mean_floor_curve.csv")
        line_plot_with_bands(floor_series, "mean floor",
                             "mean floor per theme (asymmetric deviation)",
                             out / "mean_floor_curve.ppm",
                             out / "mean_floor_curve.png")
        length_series = curve_series(rows, "mean_length", band="std")
        write_curve_csv(length_series, out / "mean_length_curve.csv")
        line_plot_with_bands(length_series, "mean episode length",
                             "mean episode length per theme (standard deviation)",
                             out / "mean_length_curve.ppm",
                             out / "mean_length_curve.png")
