import json

import pytest

from riskspot import ConfigError, RunConfig


class TestRunConfig:
    def test_defaults_validate(self):
        config = RunConfig()
        assert config.s_max_s == 12.0
        assert config.effective_tau0_s() == 3.0

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="smoothing_width"):
            RunConfig.from_dict({"smoothing_width": 10})

    def test_from_file_round_trip(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"s_max_s": 6.0, "pmm_components": 9}))
        config = RunConfig.from_file(path)
        assert config.s_max_s == 6.0
        assert config.pmm_components == 9
        assert RunConfig.from_dict(config.to_dict()).to_dict() == config.to_dict()

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            RunConfig.from_file(path)

    def test_escape_rate_mode(self):
        as_rate = RunConfig(tau0_s=3.0, escape_mode="rate")
        assert as_rate.effective_tau0_s() == pytest.approx(1.0 / 3.0)

    def test_even_pmm_components_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig(pmm_components=14)

    def test_overlap_factor_at_most_one_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig(pmm_overlap_factor=1.0)

    def test_th_bins_must_be_four_ordered_intervals(self):
        with pytest.raises(ConfigError):
            RunConfig(th_bins_s=((0.0, 0.5), (0.5, 1.0), (1.0, 2.0)))
        with pytest.raises(ConfigError, match="ascending"):
            RunConfig(th_bins_s=((2.0, 4.0), (1.0, 2.0), (0.5, 1.0), (0.0, 0.5)))

    def test_negative_smoothing_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig(smooth_pos_s=-1.0)

    def test_unknown_enums_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig(growth_kind="diffusive")
        with pytest.raises(ConfigError):
            RunConfig(behavior="brake")
        with pytest.raises(ConfigError):
            RunConfig(escape_mode="seconds")

    def test_adapters_carry_values(self):
        config = RunConfig(sigma0_m=0.5, velocity_factor=0.2, pmm_enabled=False)
        growth = config.growth()
        assert growth.sigma0_m == 0.5
        assert growth.velocity_factor == 0.2
        collision = config.collision()
        assert collision.effective_components == 1
        schema = config.schema()
        assert schema.vehicle_id == "Vehicle_ID"
