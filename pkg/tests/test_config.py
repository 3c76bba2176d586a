from __future__ import annotations

from pathlib import Path

import pytest

from scenfuzz.config import (
    CampaignConfig,
    apply_overrides,
    config_from_dict,
    config_to_dict,
    load_config,
    validate_config,
)
from scenfuzz.errors import ConfigError

REPO_ROOT = Path(__file__).resolve().parent.parent


class TestShippedConfigs:
    def test_collision_defaults(self):
        cfg = load_config(REPO_ROOT / "configs" / "collision_avoidance.toml")
        validate_config(cfg)
        assert cfg.environment == "collision-avoidance-2d"
        assert cfg.max_frames == 100
        assert cfg.budget == 3000
        assert (cfg.alpha, cfg.beta, cfg.delta) == (25.0, 0.7, 0.1)

    def test_coopnav_defaults(self):
        cfg = load_config(REPO_ROOT / "configs" / "coop_nav.toml")
        validate_config(cfg)
        assert cfg.environment == "coop-nav"
        assert cfg.max_frames == 25
        assert cfg.budget == 2000
        assert (cfg.alpha, cfg.beta, cfg.delta) == (20.0, 0.5, 0.1)


class TestLoading:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "missing.toml")

    def test_invalid_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("not [valid toml", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match=r"unknown config section \[mystery\]"):
            config_from_dict({"mystery": {}})

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key campaign.no_such"):
            config_from_dict({"campaign": {"no_such": 1}})

    def test_key_in_wrong_section(self):
        with pytest.raises(ConfigError, match="unknown key campaign.alpha"):
            config_from_dict({"campaign": {"alpha": 10}})

    def test_type_coercion_and_bad_values(self):
        cfg = config_from_dict({"generator": {"alpha": 30}})
        assert cfg.alpha == 30.0
        with pytest.raises(ConfigError, match="bad value"):
            config_from_dict({"campaign": {"budget": "lots"}})

    def test_experience_list(self):
        cfg = config_from_dict({"llm": {"experience": ["plan a", "plan b"]}})
        assert cfg.experience == ["plan a", "plan b"]
        with pytest.raises(ConfigError):
            config_from_dict({"llm": {"experience": "just one"}})


class TestValidation:
    def base(self, **kwargs):
        cfg = CampaignConfig(**kwargs)
        validate_config(cfg)
        return cfg

    def test_defaults_valid(self):
        self.base()

    def test_bad_method(self):
        with pytest.raises(ConfigError, match="unknown method"):
            self.base(method="bogus")

    def test_bad_environment(self):
        with pytest.raises(ConfigError, match="unknown environment"):
            self.base(environment="mars-rover")

    def test_bad_backend(self):
        with pytest.raises(ConfigError, match="unknown backend"):
            self.base(backend="telepathy")

    def test_budget_floor(self):
        with pytest.raises(ConfigError, match="budget"):
            self.base(budget=0)

    def test_alpha_range(self):
        with pytest.raises(ConfigError, match="alpha"):
            self.base(alpha=150.0)

    def test_beta_range(self):
        with pytest.raises(ConfigError, match="beta"):
            self.base(beta=1.0)

    def test_mock_requires_responses(self):
        with pytest.raises(ConfigError, match="mock_responses"):
            self.base(backend="mock")

    def test_negative_t_r_rejected(self):
        with pytest.raises(ConfigError, match="t_r"):
            self.base(t_r=-1.0)

    def test_distance_norm_choices(self):
        self.base(distance_norm="linf")
        with pytest.raises(ConfigError, match="distance norm"):
            self.base(distance_norm="manhattan")


class TestOverrides:
    def test_dotted_paths_apply(self):
        cfg = CampaignConfig()
        apply_overrides(cfg, ["generator.alpha=20", "campaign.budget=50", "llm.backend=mock"])
        assert cfg.alpha == 20.0
        assert cfg.budget == 50
        assert cfg.backend == "mock"

    def test_unknown_key_is_hard_error(self):
        with pytest.raises(ConfigError, match="unknown override key"):
            apply_overrides(CampaignConfig(), ["generator.gamma=1"])

    def test_section_required(self):
        with pytest.raises(ConfigError, match="section prefix"):
            apply_overrides(CampaignConfig(), ["alpha=20"])

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError, match="section.key=value"):
            apply_overrides(CampaignConfig(), ["generator.alpha"])

    def test_list_field_not_overridable(self):
        with pytest.raises(ConfigError, match="cannot be set"):
            apply_overrides(CampaignConfig(), ["llm.experience=plan"])

    def test_every_config_field_reachable(self):
        # the 1:1 mapping: every field appears in exactly one section
        from dataclasses import fields

        from scenfuzz.config import _SECTIONS

        mapped = [key for keys in _SECTIONS.values() for key in keys]
        assert sorted(mapped) == sorted(f.name for f in fields(CampaignConfig))
        assert len(mapped) == len(set(mapped))


def test_config_round_trips_through_dict():
    cfg = CampaignConfig(budget=77, alpha=12.5, experience=["x"])
    again = config_from_dict(config_to_dict(cfg))
    assert again == cfg
