from __future__ import annotations

import pytest

from minitower.config import (
    RunConfig,
    derive_streams,
    format_int_list,
    load_config,
    parse_int_list,
    preset_config,
)
from minitower.errors import ConfigurationError, SeedOverlapError


class TestIntLists:
    def test_ranges_and_singles(self):
        assert parse_int_list("0-3,7,10-11") == (0, 1, 2, 3, 7, 10, 11)

    def test_format_compresses_runs(self):
        assert format_int_list([0, 1, 2, 3, 7, 10, 11]) == "0-3,7,10-11"

    def test_roundtrip(self):
        assert parse_int_list(format_int_list(range(100))) == tuple(range(100))

    def test_bad_range_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_int_list("9-3")


class TestPresets:
    def test_desk_preset_validates(self):
        preset_config("desk").validate()

    def test_paper_fidelity_resolves_table_values(self):
        ppo = preset_config("paper-fidelity").ppo_config
        assert ppo.discount == 0.99
        assert ppo.gae_lambda == 0.95
        assert ppo.value_coef == 0.5
        assert ppo.entropy_coef == 0.01
        assert ppo.epochs == 4
        assert ppo.num_envs == 16
        assert ppo.minibatches == 4
        assert ppo.learning_rate == 3.25e-4
        assert ppo.clip_range == 0.2
        assert ppo.trajectory_length == 8192
        assert ppo.total_updates == 50_000

    def test_paper_fidelity_encoder_is_3136_wide(self):
        from minitower.model import ActorCritic
        import numpy as np

        config = preset_config("paper-fidelity")
        model = ActorCritic(config.model_config, np.random.default_rng(0))
        assert model.flat_width == 3136

    def test_desk_pools(self):
        config = preset_config("desk")
        assert config.training_seeds == tuple(range(100))
        assert config.training_themes == ("ancient", "industrial", "modern")
        assert config.eval_protocol.eval_seeds == tuple(range(1000, 1005))

    def test_unknown_preset_rejected(self):
        with pytest.raises(ConfigurationError):
            preset_config("nope")


class TestSerialization:
    def test_text_roundtrip(self, tmp_path):
        config = preset_config("desk")
        path = tmp_path / "desk.cfg"
        config.save(path)
        loaded = load_config(path)
        assert loaded.to_mapping() == config.to_mapping()

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        text = preset_config("desk").to_text().replace(
            "hidden_size", "hidden_sise")
        path.write_text(text)
        with pytest.raises(ConfigurationError, match="hidden_sise"):
            load_config(path)

    def test_missing_file_rejected(self):
        with pytest.raises(ConfigurationError):
            load_config("/nonexistent/path.cfg")


class TestOverrides:
    def test_bare_key_resolves_by_uniqueness(self):
        config = preset_config("desk").with_overrides(["total_updates=10"])
        assert config.ppo_config.total_updates == 10

    def test_sectioned_key(self):
        config = preset_config("desk").with_overrides(
            ["ppo.learning_rate=1e-3", "env.frame_height=84",
             "env.frame_width=84"])
        assert config.ppo_config.learning_rate == 1e-3
        assert config.env_config.frame_height == 84

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError, match="unknown config key"):
            preset_config("desk").with_overrides(["nonsense=1"])

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigurationError, match="total_updates"):
            preset_config("desk").with_overrides(["total_updates=ten"])

    def test_overrides_appear_in_resolved_text(self):
        config = preset_config("desk").with_overrides(["total_updates=7"])
        assert "total_updates = 7" in config.to_text()


class TestValidation:
    def test_seed_overlap_rejected(self):
        config = preset_config("desk").with_overrides(["eval.eval_seeds=5,1000"])
        with pytest.raises(SeedOverlapError):
            config.validate()

    def test_conv_chain_too_small_rejected(self):
        config = preset_config("desk").with_overrides(
            ["env.frame_height=20", "env.frame_width=20"])
        with pytest.raises(ConfigurationError):
            config.validate()

    def test_bad_theme_rejected(self):
        config = preset_config("desk").with_overrides(
            ["pools.training_themes=ancient,neon"])
        with pytest.raises(ConfigurationError, match="neon"):
            config.validate()


class TestSeedStreams:
    def test_streams_are_deterministic_and_distinct(self):
        a = derive_streams(42)
        b = derive_streams(42)
        assert a == b
        values = [a.init, a.vec, a.sampler, a.shuffle, a.eval]
        assert len(set(values)) == 5
        assert derive_streams(43) != a
