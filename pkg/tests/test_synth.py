import math

import numpy as np
import pytest

from ghicorr.data import align, daylight_filter, parse_met_csv, parse_nwp_csv
from ghicorr.errors import ConfigError
from ghicorr.features import BaselineSpec, predict_baseline
from ghicorr.model_selection import nrmse
from ghicorr.synth import (
    ChannelBias,
    ScenarioConfig,
    clear_sky_ghi,
    generate_scenario,
    scenario_config_from_dict,
    scenario_config_to_dict,
    scenario_to_csv,
)


class TestClearSky:
    def test_peak_at_13(self):
        assert clear_sky_ghi(13, peak=950.0) == 950.0

    def test_zero_at_boundaries(self):
        assert clear_sky_ghi(7) == 0.0
        assert clear_sky_ghi(19) == 0.0
        assert clear_sky_ghi(0) == 0.0
        assert clear_sky_ghi(23) == 0.0

    def test_hour_10_matches_trigonometry(self):
        expected = 950.0 * math.sin(math.pi * 3 / 12)
        assert abs(clear_sky_ghi(10, peak=950.0) - expected) < 1e-12
        assert abs(expected - 950.0 * math.sqrt(2) / 2) < 1e-9

    def test_bad_hour(self):
        with pytest.raises(ValueError):
            clear_sky_ghi(24)


class TestGenerateScenario:
    def test_seed_determinism(self):
        a = generate_scenario(ScenarioConfig(n_days=5, seed=7))
        b = generate_scenario(ScenarioConfig(n_days=5, seed=7))
        assert a.met == b.met
        assert a.nwp == b.nwp

    def test_different_seeds_differ(self):
        a = generate_scenario(ScenarioConfig(n_days=5, seed=1))
        b = generate_scenario(ScenarioConfig(n_days=5, seed=2))
        assert a.met != b.met

    def test_row_counts(self):
        s = generate_scenario(ScenarioConfig(n_days=1, seed=0))
        for loc in ("X0", "X1", "X2", "X3"):
            assert len(s.met[loc]) == 24
        assert len(s.all_nwp()) == 4 * 4 * 24

    def test_irradiance_invariants(self):
        s = generate_scenario(ScenarioConfig(n_days=20, seed=3))
        for rows in [*s.met.values(), *s.nwp.values()]:
            for r in rows:
                assert r.ghi >= 0.0
                assert 0.0 <= r.dhi <= r.ghi
                assert r.di == max(0.0, r.ghi - r.dhi)
                assert 0.0 <= r.relative_humidity <= 100.0

    def test_night_hours_are_dark(self):
        s = generate_scenario(ScenarioConfig(n_days=5, seed=4))
        for r in s.met["X0"]:
            if r.time.hour_of_day <= 7 or r.time.hour_of_day >= 19:
                assert r.ghi == 0.0

    def test_no_clouds_equals_clear_sky(self):
        cfg = ScenarioConfig(n_days=3, seed=5, cloud_depth=0.0)
        s = generate_scenario(cfg)
        for r in s.met["X0"]:
            assert abs(r.ghi - clear_sky_ghi(r.time.hour_of_day, cfg.peak_clear_ghi)) < 1e-9

    def test_daylight_ghi_autocorrelation_positive(self):
        for rho in (0.5, 0.7, 0.9):
            cfg = ScenarioConfig(n_days=60, seed=6, cloud_persistence=rho)
            s = generate_scenario(cfg)
            ghi = np.array([r.ghi for r in s.met["X0"]
                            if 8 <= r.time.hour_of_day <= 19])
            a, b = ghi[:-1], ghi[1:]
            corr = np.corrcoef(a, b)[0, 1]
            assert corr > 0.0

    def test_identity_channel_reproduces_met(self):
        cfg = ScenarioConfig(n_days=4, seed=8, channel_biases={
            "M1": ChannelBias(gain=1.0, offset=0.0, noise_sd=0.0, lag_smear=0)})
        s = generate_scenario(cfg)
        for loc in cfg.locations:
            met_ghi = [r.ghi for r in s.met[loc]]
            nwp_ghi = [r.ghi for r in s.nwp[("M1", loc)]]
            assert met_ghi == nwp_ghi
        ds = daylight_filter(align(s.all_met(), s.all_nwp(), "X0", ("X1", "X2", "X3")))
        bp = predict_baseline(ds, BaselineSpec("raw_wrf", channel="M1"))
        assert nrmse(bp.predictions, ds.met["ghi"]) == 0.0

    def test_noise_monotonically_degrades_raw_channel(self):
        # independent direct-metric oracle: NRMSE computed straight from arrays
        levels = {0.0: [], 30.0: [], 60.0: []}
        for seed in range(3):
            for sd, acc in levels.items():
                cfg = ScenarioConfig(n_days=30, seed=seed, channel_biases={
                    "M1": ChannelBias(gain=1.0, offset=0.0, noise_sd=sd, lag_smear=0)})
                s = generate_scenario(cfg)
                day = [(r.ghi, o.ghi) for r, o in zip(s.met["X0"], s.nwp[("M1", "X0")])
                       if 8 <= r.time.hour_of_day <= 19]
                truth = np.array([t for t, _ in day])
                pred = np.array([p for _, p in day])
                acc.append(float(np.sqrt(np.mean((pred - truth) ** 2)) / np.mean(truth)))
        means = {sd: np.mean(acc) for sd, acc in levels.items()}
        assert means[0.0] < means[30.0] < means[60.0]
        assert means[0.0] == 0.0

    def test_smear_shifts_channel_signal(self):
        cfg = ScenarioConfig(n_days=10, seed=9, channel_biases={
            "M1": ChannelBias(gain=1.0, offset=0.0, noise_sd=0.0, lag_smear=1)})
        s = generate_scenario(cfg)
        met = [r.ghi for r in s.met["X0"]]
        nwp = [r.ghi for r in s.nwp[("M1", "X0")]]
        assert nwp[:-1] == met[1:]


class TestScenarioCsv:
    def test_round_trip_exact(self):
        s = generate_scenario(ScenarioConfig(n_days=6, seed=10))
        met_bytes, nwp_bytes = scenario_to_csv(s)
        assert parse_met_csv(met_bytes) == s.all_met()
        assert parse_nwp_csv(nwp_bytes) == s.all_nwp()

    def test_serialization_deterministic(self):
        a = scenario_to_csv(generate_scenario(ScenarioConfig(n_days=4, seed=11)))
        b = scenario_to_csv(generate_scenario(ScenarioConfig(n_days=4, seed=11)))
        assert a == b

    def test_one_day_row_count(self):
        s = generate_scenario(ScenarioConfig(n_days=1, seed=0))
        met_bytes, _ = scenario_to_csv(s)
        assert len(met_bytes.decode().strip().split("\n")) == 1 + 4 * 24


class TestConfigValidation:
    def test_defaults_valid(self):
        ScenarioConfig().validate()

    @pytest.mark.parametrize("kwargs,field", [
        (dict(n_days=0), "n_days"),
        (dict(peak_clear_ghi=-1.0), "peak_clear_ghi"),
        (dict(cloud_persistence=1.0), "cloud_persistence"),
        (dict(cloud_depth=1.4), "cloud_depth"),
        (dict(neighbors=("X1", "X1", "X2")), "neighbors"),
        (dict(channel_biases={}), "channel_biases"),
        (dict(channel_biases={"M9": ChannelBias()}), "channel_biases.M9"),
        (dict(channel_biases={"M1": ChannelBias(gain=-0.5)}), "channel_biases.M1.gain"),
        (dict(channel_biases={"M1": ChannelBias(noise_sd=-2.0)}), "channel_biases.M1.noise_sd"),
        (dict(channel_biases={"M1": ChannelBias(lag_smear=2)}), "channel_biases.M1.lag_smear"),
    ])
    def test_field_errors(self, kwargs, field):
        with pytest.raises(ConfigError) as err:
            ScenarioConfig(**kwargs).validate()
        assert err.value.field == field

    def test_dict_round_trip(self):
        cfg = ScenarioConfig(n_days=7, seed=3)
        doc = scenario_config_to_dict(cfg)
        back = scenario_config_from_dict(doc)
        assert back == cfg

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError) as err:
            scenario_config_from_dict({"n_dayz": 5})
        assert err.value.field == "n_dayz"

    def test_bad_nested_field_named(self):
        with pytest.raises(ConfigError) as err:
            scenario_config_from_dict(
                {"channel_biases": {"M1": {"noise_sd": -3.0}}})
        assert err.value.field == "channel_biases.M1.noise_sd"
