"""Command-line entry point: train, eval, render-paths, and bench.

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or
arguments.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config, preset_config
from .charts import histogram_chart
from .env import read_recording, run_benchmark, write_benchmark_csv
from .errors import ConfigurationError, MiniTowerError
from .evaluation import (
    EvalProtocol,
    evaluate,
    termination_histogram,
    write_eval_report,
    write_histogram_csv,
)
from .model import ActorCritic
from .pathviz import render_paths_for_recording
from .training import Trainer, checkpoint_paths, latest_checkpoint


def _resolve_config(args) -> RunConfig:
    if getattr(args, "config", None):
        config = load_config(args.config)
    elif getattr(args, "preset", None):
        config = preset_config(args.preset)
    else:
        raise ConfigurationError("provide --config FILE or --preset NAME")
    overrides = list(getattr(args, "override", None) or [])
    if getattr(args, "run_dir", None):
        overrides.append(f"run.run_dir={args.run_dir}")
    if overrides:
        config = config.with_overrides(overrides)
    config.validate()
    return config


def cmd_train(args) -> int:
    config = _resolve_config(args)
    trainer = Trainer(config, verbose=not args.quiet)
    run_dir = trainer.train(resume=args.resume)
    print(f"run directory: {run_dir}")
    return 0


def _load_run(run_dir: Path) -> RunConfig:
    config_path = run_dir / "config.cfg"
    if not config_path.exists():
        raise ConfigurationError(f"{run_dir} has no config.cfg")
    return load_config(config_path)


def cmd_eval(args) -> int:
    run_dir = Path(args.run_dir)
    config = _load_run(run_dir)
    if args.checkpoint:
        ckpt = Path(args.checkpoint)
    else:
        update = latest_checkpoint(run_dir)
        if update is None:
            raise ConfigurationError(f"no checkpoints in {run_dir}")
        ckpt = checkpoint_paths(run_dir, update)["params"]
    if not ckpt.exists():
        raise ConfigurationError(f"checkpoint not found: {ckpt}")

    base = config.eval_protocol
    protocol = EvalProtocol(
        eval_seeds=tuple(args.seeds) if args.seeds else base.eval_seeds,
        repetitions=args.repetitions or base.repetitions,
        themes=tuple(args.themes) if args.themes else base.themes,
        deterministic_policy=args.greedy or base.deterministic_policy,
        rng_seed=base.rng_seed)

    model = ActorCritic(config.model_config, np.random.default_rng(0))
    model.load(ckpt)
    out_dir = Path(args.out) if args.out else run_dir / "eval" / f"manual_{ckpt.stem}"
    report = evaluate(model, config.env_config, protocol, config.training_seeds,
                      recordings_dir=out_dir / "recordings",
                      allow_training_seeds=args.allow_training_seeds)
    paths = write_eval_report(report, out_dir)
    counts = termination_histogram(report.rows, config.env_config.floor_cap)
    write_histogram_csv(counts, out_dir / "histogram.csv")
    histogram_chart(counts, out_dir / "histogram.ppm", out_dir / "histogram.png")
    for agg in report.aggregates:
        print(f"{agg.theme}: mean floor {agg.mean_floor:.2f} "
              f"mean length {agg.mean_length:.1f} over {agg.episodes} episodes")
    print(f"episode table: {paths['episodes']}")
    return 0


def cmd_render_paths(args) -> int:
    run_dir = Path(args.run_dir)
    config = _load_run(run_dir)
    recordings = sorted(run_dir.glob(f"eval/**/recordings/{args.episodes}.rec"))
    if not recordings:
        raise ConfigurationError(
            f"no recordings match {args.episodes!r} under {run_dir}/eval")
    out_dir = Path(args.out) if args.out else run_dir / "paths"
    written = []
    for rec_path in recordings:
        try:
            recording = read_recording(rec_path)
        except MiniTowerError as exc:
            print(f"error: {rec_path}: {exc}", file=sys.stderr)
            return 1
        written.extend(render_paths_for_recording(
            recording, config.env_config, out_dir, stem=rec_path.stem))
    print(f"wrote {len(written)} path images to {out_dir}")
    return 0


def cmd_bench(args) -> int:
    config = _resolve_config(args)
    report = run_benchmark(config.env_config, args.episodes,
                           config.training_seeds, config.training_themes,
                           rng_seed=config.master_seed)
    print(f"episodes: {len(report.episodes)}")
    print(f"steps/sec: {report.steps_per_second:.1f}")
    print(f"mean return: {report.mean_return:.4f}")
    print(f"mean floor: {report.mean_floor:.4f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_benchmark_csv(report, out / "bench.csv")
        print(f"per-episode table: {out / 'bench.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minitower",
        description="procedural tower RL: training, evaluation, and tooling")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="run PPO training into a run directory")
    train.add_argument("--config", help="config file path")
    train.add_argument("--preset", help="named preset (desk, paper-fidelity)")
    train.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="config override, repeatable")
    train.add_argument("--run-dir", help="run directory (overrides config)")
    train.add_argument("--resume", action="store_true",
                       help="resume from the latest checkpoint")
    train.add_argument("--quiet", action="store_true")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="evaluate a checkpoint on the protocol")
    ev.add_argument("--run-dir", required=True)
    ev.add_argument("--checkpoint", help="parameter checkpoint (default: latest)")
    ev.add_argument("--themes", type=lambda s: s.split(","),
                    help="comma-separated theme subset")
    ev.add_argument("--seeds", type=lambda s: [int(x) for x in s.split(",")],
                    help="comma-separated eval seeds")
    ev.add_argument("--repetitions", type=int)
    ev.add_argument("--greedy", action="store_true",
                    help="argmax policy instead of sampling")
    ev.add_argument("--allow-training-seeds", action="store_true",
                    help="permit seeds from the training pool (probe runs)")
    ev.add_argument("--out", help="output directory")
    ev.set_defaults(func=cmd_eval)

    rp = sub.add_parser("render-paths", help="draw per-floor agent path images")
    rp.add_argument("--run-dir", required=True)
    rp.add_argument("--episodes", default="*",
                    help="glob over recording stems (default: all)")
    rp.add_argument("--out", help="output directory")
    rp.set_defaults(func=cmd_render_paths)

    bench = sub.add_parser("bench", help="random-policy throughput benchmark")
    bench.add_argument("--config", help="config file path")
    bench.add_argument("--preset", default="desk")
    bench.add_argument("--override", action="append", metavar="KEY=VALUE")
    bench.add_argument("--episodes", type=int, default=100)
    bench.add_argument("--out", help="directory for the per-episode CSV")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (MiniTowerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
