"""Scenario configuration, validation rules, presets, and TOML loading."""

import dataclasses
import textwrap

import numpy as np
import pytest

from adaptsense.config import (
    ConfigError,
    RandomSubbands,
    ScenarioConfig,
    SubbandSpec,
    draw_subbands,
    load_config,
    load_preset,
    realize,
)


class TestDerivedSizes:
    def test_desk_preset_dimensions(self):
        cfg = load_preset("desk")
        assert cfg.num_samples == 4000
        assert cfg.num_measurements == 1000
        assert cfg.mini_slots == 20
        assert cfg.block_size == 50
        assert cfg.num_samples % cfg.num_subchannels == 0

    def test_full_preset_dimensions(self):
        # Full-scale setup: tau = 5 us at f_N = 4 GHz, f_S = 1 GHz.
        cfg = load_preset("full")
        assert cfg.num_samples == 20000
        assert cfg.num_measurements == 5000
        assert cfg.mini_slots == 20
        assert cfg.block_size == 250

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            load_preset("nope")

    def test_toy_sizes(self, toy_config):
        assert toy_config.num_samples == 400
        assert toy_config.num_measurements == 100
        assert toy_config.block_size == 10
        assert toy_config.bins_per_subchannel == 10


class TestValidation:
    def test_nyquist_below_2w_rejected(self, toy_config):
        with pytest.raises(ConfigError):
            dataclasses.replace(toy_config, nyquist_rate_hz=50e6)

    def test_subnyquist_at_or_above_2w_rejected(self, toy_config):
        with pytest.raises(ConfigError):
            dataclasses.replace(toy_config, subnyquist_rate_hz=62.5e6)

    def test_noninteger_sample_count_rejected(self, toy_config):
        with pytest.raises(ConfigError):
            dataclasses.replace(toy_config, sensing_interval_s=6.41e-6)

    def test_slots_must_divide_measurements(self, toy_config):
        with pytest.raises(ConfigError):
            dataclasses.replace(toy_config, mini_slots=7)

    def test_subchannels_must_divide_samples(self, toy_config):
        with pytest.raises(ConfigError):
            dataclasses.replace(toy_config, num_subchannels=39)

    def test_sensing_interval_must_fit_frame(self, toy_config):
        with pytest.raises(ConfigError):
            dataclasses.replace(toy_config, frame_length_s=6.4e-6)

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 0.001])
    def test_bad_test_fraction_rejected(self, toy_config, fraction):
        # 0.001 leaves no testing rows in a 10-row block.
        with pytest.raises(ConfigError):
            dataclasses.replace(toy_config, test_fraction=fraction)

    def test_nonpositive_accuracy_rejected(self, toy_config):
        with pytest.raises(ConfigError):
            dataclasses.replace(toy_config, accuracy=0.0)

    def test_negative_subband_power_rejected(self, toy_config):
        with pytest.raises(ConfigError):
            dataclasses.replace(
                toy_config, subbands=(SubbandSpec(6e6, 1e6, -1.0),))


class TestSubbands:
    def test_from_snr_db(self):
        sb = SubbandSpec.from_snr_db(1e6, 2e5, 20)
        assert sb.power == pytest.approx(100.0)

    def test_draw_subbands_disjoint_and_in_band(self, toy_config):
        recipe = RandomSubbands(count=8, bandwidth_hz=(0.3e6, 1.0e6),
                                snr_db=(7, 27))
        rng = np.random.default_rng(5)
        subbands = draw_subbands(recipe, toy_config, rng)
        assert len(subbands) == 8
        spans = sorted((sb.center_freq_hz - sb.bandwidth_hz / 2,
                        sb.center_freq_hz + sb.bandwidth_hz / 2)
                       for sb in subbands)
        for (_, hi), (lo, _) in zip(spans, spans[1:]):
            assert lo >= hi
        assert spans[0][0] >= 0
        assert spans[-1][1] <= toy_config.total_bandwidth_hz
        tau = toy_config.sensing_interval_s
        for sb in subbands:
            assert tau / 8 <= sb.time_offset_s <= tau / 4
            assert 10 ** 0.7 <= sb.power <= 10 ** 2.7

    def test_realize_offsets_seeds_and_draws(self, toy_config):
        cfg = dataclasses.replace(toy_config, subbands=None,
                                  random_subbands=RandomSubbands(count=4))
        a = realize(cfg, trial=3)
        assert a.noise_seed == toy_config.noise_seed + 3
        assert a.matrix_seed == toy_config.matrix_seed + 3
        assert len(a.subbands) == 4
        # Deterministic: same trial, same draw.
        b = realize(cfg, trial=3)
        assert a.subbands == b.subbands
        # Different trial, different draw.
        c = realize(cfg, trial=4)
        assert a.subbands != c.subbands

    def test_realize_keeps_explicit_subbands(self, toy_config):
        assert realize(toy_config, trial=5).subbands == toy_config.subbands


class TestTomlLoading:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "scenario.toml"
        path.write_text(textwrap.dedent("""\
            schema_version = 1
            [scenario]
            total_bandwidth_hz = 31.25e6
            num_subchannels = 40
            frame_length_s = 12.8e-6
            sensing_interval_s = 6.4e-6
            mini_slots = 10
            nyquist_rate_hz = 62.5e6
            subnyquist_rate_hz = 15.625e6

            [[subband]]
            center_freq_hz = 6.0e6
            bandwidth_hz = 1.0e6
            snr_db = 20
        """))
        cfg = load_config(path)
        assert cfg.num_samples == 400
        assert cfg.subbands[0].power == pytest.approx(100.0)

    def test_bad_schema_version(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("schema_version = 99\n[scenario]\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_scenario_table(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("schema_version = 1\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_presets_have_random_recipes(self):
        for name in ("desk", "full"):
            cfg = load_preset(name)
            assert cfg.subbands is None
            assert cfg.random_subbands.count == 8
