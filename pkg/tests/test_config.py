"""Scenario-configuration parsing, unit conversion, and validation tests."""

import json

import numpy as np
import pytest

from irs_mimo.config import (
    ConfigError,
    ScenarioConfig,
    config_from_dict,
    db_to_linear,
    dbm_to_watts,
    load_config,
    load_config_with_experiment,
    path_loss,
)


class TestUnitConversion:
    def test_db_to_linear(self):
        assert db_to_linear(0.0) == pytest.approx(1.0)
        assert db_to_linear(-20.0) == pytest.approx(0.01)
        assert db_to_linear(10.0) == pytest.approx(10.0)

    def test_dbm_to_watts(self):
        assert dbm_to_watts(0.0) == pytest.approx(1e-3)
        assert dbm_to_watts(30.0) == pytest.approx(1.0)

    def test_path_loss(self):
        # -20 dB at the 1 m reference, exponent 2.1 at 10 m
        assert path_loss(1.0, 1.0, 0.01, 2.1) == pytest.approx(0.01)
        assert path_loss(10.0, 1.0, 0.01, 2.1) == pytest.approx(0.01 * 10 ** -2.1)

    def test_path_loss_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            path_loss(0.0, 1.0, 0.01, 2.0)


class TestScenarioConfig:
    def test_defaults_valid(self):
        cfg = ScenarioConfig()
        assert cfg.K == 4 and cfg.T == 1000
        assert cfg.q == pytest.approx(cfg.N / cfg.M)

    def test_pilot_power_default_tracks_first_user(self):
        cfg = ScenarioConfig()
        assert cfg.pilot_power() == pytest.approx(cfg.e_k[0] / (cfg.M * cfg.N))
        assert ScenarioConfig(p_t=2e-5).pilot_power() == 2e-5

    def test_data_powers(self):
        cfg = ScenarioConfig(K=2, e_k=[1e-3, 2e-3])
        assert np.allclose(cfg.data_powers(), [1e-3, 2e-3] / np.float64(cfg.M * cfg.N))

    def test_rejects_t_not_greater_than_k(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(K=4, T=4)

    def test_rejects_wrong_e_k_length(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(K=3, e_k=[1e-3])

    def test_rejects_unstable_correlation(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(c_irs=1.0)

    def test_user_distances_deterministic_per_seed(self):
        cfg = ScenarioConfig(seed=9)
        d1, d2 = cfg.user_distances(), cfg.user_distances()
        assert np.array_equal(d1, d2)
        assert len(d1) == cfg.K
        # users sit in a disk of radius 5 centered 10 m away
        assert np.all(d1 >= 5.0) and np.all(d1 <= 15.0)

    def test_explicit_distances_override(self):
        cfg = ScenarioConfig(K=2, e_k=[1e-3] * 2, d_iu=[8.0, 12.0])
        assert np.array_equal(cfg.user_distances(), [8.0, 12.0])

    def test_echo_resolves_defaults(self):
        echo = ScenarioConfig().echo()
        assert echo["p_t"] > 0
        assert len(echo["d_iu"]) == 4
        assert echo["beta_bu"] == [0.0] * 4
        json.dumps(echo)  # must be JSON-serializable


class TestConfigParsing:
    def test_db_keys_resolved(self):
        cfg = config_from_dict({"beta0_db": -20.0, "sigma2_dbm": -110.0})
        assert cfg.beta0 == pytest.approx(0.01)
        assert cfg.sigma2 == pytest.approx(1e-14)

    def test_complex_as_pair(self):
        cfg = config_from_dict({"c_bs": [0.2, 0.1]})
        assert cfg.c_bs == pytest.approx(0.2 + 0.1j)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"bandwidth": 1e6})

    def test_load_json(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text(json.dumps({"K": 2, "e_k": [1e-3, 1e-3], "seed": 3}))
        cfg = load_config(p)
        assert cfg.K == 2 and cfg.seed == 3

    def test_load_toml(self, tmp_path):
        p = tmp_path / "s.toml"
        p.write_text('K = 2\ne_k = [1e-3, 1e-3]\nN = 64\nM = 8\n')
        cfg = load_config(p)
        assert cfg.N == 64 and cfg.M == 8

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.toml")

    def test_experiment_table_split_off(self, tmp_path):
        p = tmp_path / "s.toml"
        p.write_text('N = 32\nM = 8\n\n[experiment]\nblocks = 7\n')
        cfg, exp = load_config_with_experiment(p)
        assert cfg.N == 32 and exp == {"blocks": 7}
        assert load_config(p).N == 32  # plain loader ignores the table
