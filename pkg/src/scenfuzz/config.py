"""Campaign configuration: TOML loading, dotted-path overrides, validation.

Config files use four sections — [campaign], [generator], [llm],
[thresholds] — that map 1:1 onto CampaignConfig fields; unknown keys are hard
errors so typos cannot silently fall back to defaults.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .environments import environment_names
from .errors import ConfigError
from .generator import PERCENTILE_METHODS
from .space import DISTANCE_NORMS

METHODS = ("llmtester", "llmtester-no-ms", "mdpfuzz", "random")
BACKENDS = ("heuristic", "mock", "http")


@dataclass
class CampaignConfig:
    # [campaign]
    environment: str = "collision-avoidance-2d"
    method: str = "llmtester"
    budget: int = 1000
    seed: int = 0
    output_dir: str = "out"
    corpus_size: int = 100
    corpus_capacity: int = 0          # 0 = unbounded
    max_frames: int = 0               # 0 = environment default
    diversity_n: int = 10
    checkpoint_every: int = 100
    sensitivity_amplitude: float = 0.02
    sensitivity_draws: int = 1
    failure_rate_window: int = 0      # 0 = whole campaign history
    # [generator]
    alpha: float = 25.0
    beta: float = 0.7
    delta: float = 0.1
    amplitude: float = 0.05
    percentile_method: str = "nearest-rank"
    # [llm]
    backend: str = "heuristic"
    model: str = "gpt-4o-mini"
    base_url: str = "https://api.openai.com/v1"
    temperature: float = 1.0
    timeout: float = 30.0
    template: str = ""                # "" = packaged default for the environment
    mock_responses: str = ""          # file of responses split on "---" lines
    feedback_cap: int = 5
    experience: list[str] = field(default_factory=list)
    # [thresholds]
    t_r: float = 0.0                  # 0 = 10% of the initial corpus reward spread
    t_s: float = 0.25
    distance_norm: str = "l2"


_SECTIONS: dict[str, tuple[str, ...]] = {
    "campaign": (
        "environment", "method", "budget", "seed", "output_dir", "corpus_size",
        "corpus_capacity", "max_frames", "diversity_n", "checkpoint_every",
        "sensitivity_amplitude", "sensitivity_draws", "failure_rate_window",
    ),
    "generator": ("alpha", "beta", "delta", "amplitude", "percentile_method"),
    "llm": (
        "backend", "model", "base_url", "temperature", "timeout", "template",
        "mock_responses", "feedback_cap", "experience",
    ),
    "thresholds": ("t_r", "t_s", "distance_norm"),
}

_FIELD_TYPES = {f.name: f.type for f in fields(CampaignConfig)}


def _coerce(key: str, value) -> object:
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            if isinstance(value, bool):
                raise ValueError("booleans are not integers here")
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "str":
            return str(value)
        if kind == "list[str]":
            if isinstance(value, str):
                raise ValueError("expected a list of strings")
            return [str(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc
    raise ConfigError(f"field {key} has unsupported type {kind}")


def validate_config(cfg: CampaignConfig) -> None:
    if cfg.environment not in environment_names():
        raise ConfigError(
            f"unknown environment {cfg.environment!r} (known: {', '.join(environment_names())})"
        )
    if cfg.method not in METHODS:
        raise ConfigError(f"unknown method {cfg.method!r} (known: {', '.join(METHODS)})")
    if cfg.backend not in BACKENDS:
        raise ConfigError(f"unknown backend {cfg.backend!r} (known: {', '.join(BACKENDS)})")
    if cfg.percentile_method not in PERCENTILE_METHODS:
        raise ConfigError(f"unknown percentile method {cfg.percentile_method!r}")
    if cfg.budget < 1:
        raise ConfigError("budget must be >= 1")
    if cfg.corpus_size < 1:
        raise ConfigError("corpus_size must be >= 1")
    if not 0.0 < cfg.alpha <= 100.0:
        raise ConfigError("generator.alpha must be in (0, 100]")
    if not 0.0 < cfg.beta < 1.0:
        raise ConfigError("generator.beta must be in (0, 1)")
    if cfg.delta < 0.0:
        raise ConfigError("generator.delta must be >= 0")
    if cfg.amplitude <= 0.0:
        raise ConfigError("generator.amplitude must be > 0")
    if cfg.sensitivity_amplitude <= 0.0:
        raise ConfigError("campaign.sensitivity_amplitude must be > 0")
    if cfg.sensitivity_draws < 1:
        raise ConfigError("campaign.sensitivity_draws must be >= 1")
    if cfg.diversity_n < 1:
        raise ConfigError("campaign.diversity_n must be >= 1")
    if cfg.checkpoint_every < 1:
        raise ConfigError("campaign.checkpoint_every must be >= 1")
    if cfg.t_s <= 0.0:
        raise ConfigError("thresholds.t_s must be > 0")
    if cfg.t_r < 0.0:
        raise ConfigError("thresholds.t_r must be >= 0 (0 means auto)")
    if cfg.distance_norm not in DISTANCE_NORMS:
        raise ConfigError(f"unknown distance norm {cfg.distance_norm!r}")
    if cfg.feedback_cap < 1:
        raise ConfigError("llm.feedback_cap must be >= 1")
    if cfg.backend == "mock" and not cfg.mock_responses:
        raise ConfigError("backend 'mock' needs llm.mock_responses")
    for name in ("max_frames", "corpus_capacity", "failure_rate_window"):
        if getattr(cfg, name) < 0:
            raise ConfigError(f"campaign.{name} must be >= 0")


def config_from_dict(data: dict) -> CampaignConfig:
    cfg = CampaignConfig()
    for section, content in data.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(content, dict):
            raise ConfigError(f"section [{section}] must be a table")
        for key, value in content.items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            setattr(cfg, key, _coerce(key, value))
    return cfg


def load_config(path: str | Path) -> CampaignConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def apply_overrides(cfg: CampaignConfig, overrides: list[str]) -> CampaignConfig:
    """Apply ``section.key=value`` strings; unknown paths are hard errors."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        dotted, raw = item.split("=", 1)
        if "." not in dotted:
            raise ConfigError(f"override key {dotted!r} needs a section prefix")
        section, key = dotted.split(".", 1)
        if section not in _SECTIONS or key not in _SECTIONS[section]:
            raise ConfigError(f"unknown override key {dotted!r}")
        if _FIELD_TYPES[key] == "list[str]":
            raise ConfigError(f"{dotted} cannot be set from the command line")
        setattr(cfg, key, _coerce(key, raw))
    return cfg


def config_to_dict(cfg: CampaignConfig) -> dict:
    """Sectioned dict view of the resolved config (for the snapshot file)."""
    return {
        section: {key: getattr(cfg, key) for key in keys}
        for section, keys in _SECTIONS.items()
    }
