"""scenfuzz: search-based testing that hunts critical, diverse scenarios for
black-box decision-making policies via an LLM-backed generator, random
mutation, and an adaptive multi-scale dispatch between the two."""
from __future__ import annotations

from .campaign import CampaignReport, compare_methods, replay_failure, run_campaign
from .config import CampaignConfig, load_config
from .corpus import Corpus, CorpusEntry, compute_sensitivity, init_random, sample_seed
from .environments import (
    Environment,
    EnvState,
    EpisodeResult,
    create_environment,
    environment_names,
    register_environment,
    run_episode,
)
from .evaluation import DiversityGrid, MetricsTracker, diversity_counts, potential_of
from .generator import GeneratorState, classify_potential, percentile, random_mutation, update_alpha
from .space import Origin, Scenario, ScenarioSpace, clip, distance, validate

__version__ = "0.1.0"

__all__ = [
    "CampaignConfig",
    "CampaignReport",
    "Corpus",
    "CorpusEntry",
    "DiversityGrid",
    "Environment",
    "EnvState",
    "EpisodeResult",
    "GeneratorState",
    "MetricsTracker",
    "Origin",
    "Scenario",
    "ScenarioSpace",
    "classify_potential",
    "clip",
    "compare_methods",
    "compute_sensitivity",
    "create_environment",
    "distance",
    "diversity_counts",
    "environment_names",
    "init_random",
    "load_config",
    "percentile",
    "potential_of",
    "random_mutation",
    "register_environment",
    "replay_failure",
    "run_campaign",
    "run_episode",
    "sample_seed",
    "update_alpha",
    "validate",
]
