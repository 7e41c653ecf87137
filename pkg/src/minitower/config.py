"""Run configuration: file grammar, presets, overrides, seed derivation.

Config files are flat, typed key=value pairs in named sections (INI style).
Integer lists accept comma-separated items where each item is a number or an
inclusive ``a-b`` range, e.g. ``training_seeds = 0-99``.  The resolved
config is written back into every run directory.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .env import EnvConfig
from .env.themes import THEME_NAMES
from .errors import ConfigurationError, SeedOverlapError
from .evaluation import EvalProtocol
from .model import ModelConfig
from .ppo import PPOConfig


def parse_int_list(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "-" in item[1:]:
            lo, hi = item.split("-", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ConfigurationError(f"bad range {item!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(item))
    if not out:
        raise ConfigurationError(f"empty integer list {text!r}")
    return tuple(out)


def format_int_list(values) -> str:
    """Compress sorted runs back into a-b ranges for readable configs."""
    values = list(values)
    parts = []
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[j + 1] == values[j] + 1:
            j += 1
        parts.append(str(values[i]) if i == j else f"{values[i]}-{values[j]}")
        i = j + 1
    return ",".join(parts)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {text!r}")


def _parse_str_list(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


_PARSERS = {
    "int": int,
    "float": float,
    "bool": _parse_bool,
    "str": lambda s: s.strip(),
    "int_list": parse_int_list,
    "str_list": _parse_str_list,
}

# section -> key -> type name; also fixes the serialization order
SCHEMA: dict[str, dict[str, str]] = {
    "run": {
        "master_seed": "int",
        "precision": "str",
        "run_dir": "str",
        "preset": "str",
    },
    "env": {
        "frame_height": "int",
        "frame_width": "int",
        "view_radius": "int",
        "stacked_frames": "int",
        "frame_skip": "int",
        "floor_cap": "int",
        "key_intro_floor": "int",
        "gap_intro_floor": "int",
        "max_rooms": "int",
        "initial_time": "int",
        "floor_time_bonus": "int",
        "orb_time_bonus": "int",
        "double_normalize": "bool",
        "max_gen_retries": "int",
    },
    "model": {
        "hidden_size": "int",
    },
    "ppo": {
        "discount": "float",
        "gae_lambda": "float",
        "value_coef": "float",
        "entropy_coef": "float",
        "total_updates": "int",
        "epochs": "int",
        "num_envs": "int",
        "trajectory_length": "int",
        "trajectory_per_env": "bool",
        "minibatches": "int",
        "learning_rate": "float",
        "clip_range": "float",
        "anneal_floor": "float",
        "advantage_normalization": "bool",
        "gradient_clip": "float",
        "value_clip": "bool",
        "eval_interval": "int",
        "checkpoint_interval": "int",
    },
    "pools": {
        "training_seeds": "int_list",
        "training_themes": "str_list",
    },
    "eval": {
        "eval_seeds": "int_list",
        "repetitions": "int",
        "themes": "str_list",
        "deterministic_policy": "bool",
    },
}

DESK_PRESET: dict[str, dict] = {
    "run": {"master_seed": 1, "precision": "float32", "run_dir": "runs/desk",
            "preset": "desk"},
    "env": {"frame_height": 64, "frame_width": 64, "view_radius": 3,
            "stacked_frames": 3, "frame_skip": 2, "floor_cap": 10,
            "key_intro_floor": 2, "gap_intro_floor": 4, "max_rooms": 4,
            "initial_time": 500, "floor_time_bonus": 250, "orb_time_bonus": 50,
            "double_normalize": True, "max_gen_retries": 20},
    "model": {"hidden_size": 512},
    # advantage normalization stays off here: with 256-transition batches,
    # reward-free rollouts otherwise normalize value noise up to std 1 and
    # the policy drifts before it ever sees a floor completion
    "ppo": {"discount": 0.99, "gae_lambda": 0.95, "value_coef": 0.5,
            "entropy_coef": 0.01, "total_updates": 2000, "epochs": 4,
            "num_envs": 2, "trajectory_length": 256,
            "trajectory_per_env": False, "minibatches": 4,
            "learning_rate": 3.25e-4, "clip_range": 0.2, "anneal_floor": 0.0,
            "advantage_normalization": False, "gradient_clip": 0.0,
            "value_clip": True, "eval_interval": 200,
            "checkpoint_interval": 200},
    "pools": {"training_seeds": tuple(range(100)),
              "training_themes": ("ancient", "industrial", "modern")},
    "eval": {"eval_seeds": tuple(range(1000, 1005)), "repetitions": 3,
             "themes": THEME_NAMES, "deterministic_policy": False},
}

PAPER_FIDELITY_PRESET: dict[str, dict] = {
    "run": {"master_seed": 1, "precision": "float32",
            "run_dir": "runs/paper-fidelity", "preset": "paper-fidelity"},
    "env": {**DESK_PRESET["env"], "frame_height": 84, "frame_width": 84},
    "model": {"hidden_size": 512},
    "ppo": {**DESK_PRESET["ppo"], "total_updates": 50_000, "num_envs": 16,
            "trajectory_length": 8192, "advantage_normalization": True},
    "pools": DESK_PRESET["pools"],
    "eval": DESK_PRESET["eval"],
}

PRESETS = {"desk": DESK_PRESET, "paper-fidelity": PAPER_FIDELITY_PRESET}


@dataclass(frozen=True)
class SeedStreams:
    """Subsidiary RNG seeds, all derived from the master seed."""

    init: int
    vec: int
    sampler: int
    shuffle: int
    eval: int


def derive_streams(master_seed: int) -> SeedStreams:
    root = np.random.SeedSequence(int(master_seed) & 0xFFFFFFFFFFFFFFFF)
    children = root.spawn(5)
    ints = [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]
    return SeedStreams(*ints)


@dataclass(frozen=True)
class RunConfig:
    """Everything one training run needs, resolvable to a single file."""

    mapping: tuple  # canonical (section, key, value) triples

    @classmethod
    def from_mapping(cls, mapping: dict[str, dict]) -> "RunConfig":
        triples = []
        for section, keys in SCHEMA.items():
            if section not in mapping:
                raise ConfigurationError(f"missing config section [{section}]")
            extra = set(mapping[section]) - set(keys)
            if extra:
                raise ConfigurationError(
                    f"unknown keys in [{section}]: {', '.join(sorted(extra))}")
            for key in keys:
                if key not in mapping[section]:
                    raise ConfigurationError(f"missing key {section}.{key}")
                triples.append((section, key, mapping[section][key]))
        return cls(mapping=tuple(triples))

    def to_mapping(self) -> dict[str, dict]:
        out: dict[str, dict] = {}
        for section, key, value in self.mapping:
            out.setdefault(section, {})[key] = value
        return out

    def get(self, section: str, key: str):
        for s, k, v in self.mapping:
            if s == section and k == key:
                return v
        raise KeyError(f"{section}.{key}")

    # -- derived dataclasses ------------------------------------------------

    @property
    def master_seed(self) -> int:
        return self.get("run", "master_seed")

    @property
    def precision(self) -> str:
        return self.get("run", "precision")

    @property
    def run_dir(self) -> str:
        return self.get("run", "run_dir")

    @property
    def env_config(self) -> EnvConfig:
        env = self.to_mapping()["env"]
        return EnvConfig(**env, obs_precision=self.precision)

    @property
    def model_config(self) -> ModelConfig:
        env = self.env_config
        return ModelConfig(
            frame_height=env.frame_height, frame_width=env.frame_width,
            stacked_frames=env.stacked_frames, color_channels=3,
            game_state_dims=2, hidden_size=self.get("model", "hidden_size"),
            branch_sizes=(2, 2, 3), precision=self.precision)

    @property
    def ppo_config(self) -> PPOConfig:
        return PPOConfig(**self.to_mapping()["ppo"])

    @property
    def training_seeds(self) -> tuple[int, ...]:
        return self.get("pools", "training_seeds")

    @property
    def training_themes(self) -> tuple[str, ...]:
        return self.get("pools", "training_themes")

    @property
    def eval_protocol(self) -> EvalProtocol:
        ev = self.to_mapping()["eval"]
        return EvalProtocol(
            eval_seeds=ev["eval_seeds"], repetitions=ev["repetitions"],
            themes=ev["themes"],
            deterministic_policy=ev["deterministic_policy"],
            rng_seed=derive_streams(self.master_seed).eval)

    def validate(self) -> None:
        if self.precision not in ("float32", "float64"):
            raise ConfigurationError(f"unknown precision {self.precision!r}")
        overlap = set(self.get("eval", "eval_seeds")) & set(self.training_seeds)
        if overlap:
            raise SeedOverlapError(
                f"eval seeds {sorted(overlap)} appear in the training pool")
        for theme in self.training_themes + tuple(self.get("eval", "themes")):
            if theme not in THEME_NAMES:
                raise ConfigurationError(f"unknown theme {theme!r}")
        self.model_config.validate()
        self.ppo_config.validate()
        self.eval_protocol.validate()
        # cheap conv-chain sanity: raises if the frames are too small
        from .model import ActorCritic  # local to avoid heavy import cycles

        ActorCritic(self.model_config, np.random.default_rng(0))

    # -- serialization --------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for section in SCHEMA:
            lines.append(f"[{section}]")
            for key, type_name in SCHEMA[section].items():
                value = self.get(section, key)
                if type_name == "int_list":
                    text = format_int_list(value)
                elif type_name == "str_list":
                    text = ",".join(value)
                elif type_name == "bool":
                    text = "true" if value else "false"
                elif type_name == "float":
                    text = repr(value)
                else:
                    text = str(value)
                lines.append(f"{key} = {text}")
            lines.append("")
        return "\n".join(lines)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    def with_overrides(self, overrides: list[str]) -> "RunConfig":
        """Apply ``key=value`` or ``section.key=value`` strings."""
        mapping = self.to_mapping()
        for item in overrides:
            if "=" not in item:
                raise ConfigurationError(f"override {item!r} is not key=value")
            target, _, raw = item.partition("=")
            target = target.strip()
            if "." in target:
                section, key = target.split(".", 1)
                if section not in SCHEMA or key not in SCHEMA[section]:
                    raise ConfigurationError(f"unknown config key {target!r}")
            else:
                matches = [s for s in SCHEMA if target in SCHEMA[s]]
                if not matches:
                    raise ConfigurationError(f"unknown config key {target!r}")
                if len(matches) > 1:
                    raise ConfigurationError(
                        f"ambiguous key {target!r}; qualify as section.key "
                        f"(sections: {', '.join(matches)})")
                section, key = matches[0], target
            parser = _PARSERS[SCHEMA[section][key]]
            try:
                mapping[section][key] = parser(raw.strip())
            except (ValueError, ConfigurationError) as exc:
                raise ConfigurationError(
                    f"bad value for {section}.{key}: {exc}") from exc
        return RunConfig.from_mapping(mapping)


def preset_config(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return RunConfig.from_mapping(
        {s: dict(kv) for s, kv in PRESETS[name].items()})


def load_config(path: str | Path) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    mapping: dict[str, dict] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown config section [{section}]")
        mapping[section] = {}
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"unknown key {section}.{key}")
            try:
                mapping[section][key] = _PARSERS[SCHEMA[section][key]](raw)
            except (ValueError, ConfigurationError) as exc:
                raise ConfigurationError(
                    f"bad value for {section}.{key}: {exc}") from exc
    return RunConfig.from_mapping(mapping)
