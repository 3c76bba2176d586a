"""Scenario database: random init, sensitivity-weighted sampling, update rules.

The corpus holds seed scenarios plus the bookkeeping the search needs:
sensitivity (sampling weight), potential (criticality proxy), and the
terminal-state grid cell its rollout landed in (freshness reference).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .environments.base import Environment, run_episode
from .evaluation import DiversityGrid, cell_index
from .space import Origin, Scenario, clip, validate

# Below this, a post-clip perturbation is considered degenerate and redrawn.
DEGENERATE_NORM = 1e-12
DEFAULT_WEIGHT_FLOOR_RATIO = 1e-3


@dataclass
class CorpusEntry:
    scenario: Scenario
    r_seed: float
    sensitivity: float
    potential: float
    freshness_cell: tuple[int, ...]
    added_at: int

    def __post_init__(self) -> None:
        if self.sensitivity < 0:
            raise ValueError("sensitivity must be nonnegative")
        if self.potential != -self.r_seed:
            raise ValueError("potential must equal -r_seed")


class UpdateOutcome(Enum):
    ADDED_NEW = "added-new"
    SEED_REMOVED = "seed-removed"
    DISCARDED = "discarded"


@dataclass
class Corpus:
    """Ordered seed collection; capacity 0 means unbounded."""

    entries: list[CorpusEntry] = field(default_factory=list)
    capacity: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def seen_cells(self) -> set[tuple[int, ...]]:
        return {e.freshness_cell for e in self.entries}

    def add(self, entry: CorpusEntry) -> None:
        self.entries.append(entry)
        if self.capacity and len(self.entries) > self.capacity:
            worst = min(range(len(self.entries)), key=lambda i: self.entries[i].potential)
            del self.entries[worst]

    def remove(self, entry: CorpusEntry) -> None:
        for i, e in enumerate(self.entries):
            if e.scenario.id == entry.scenario.id:
                del self.entries[i]
                return
        raise ValueError(f"scenario {entry.scenario.id} is not in the corpus")


def compute_sensitivity(
    env: Environment,
    scenario: Scenario,
    amplitude: float,
    rng: np.random.Generator,
    *,
    max_frames: int | None = None,
    draws: int = 1,
    retry_budget: int = 32,
) -> float:
    """Reward change per unit perturbation of the scenario's initial state.

    One perturbation is drawn per dimension from U(-amplitude*range_i,
    +amplitude*range_i), clipped into bounds; the returned value is
    |r_seed - r_delta| / ||realized perturbation||_2, averaged over ``draws``.
    """
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    if draws < 1:
        raise ValueError("draws must be >= 1")
    space = env.space
    half_widths = np.asarray(space.ranges) * amplitude
    r_seed = run_episode(env, scenario, max_frames).cumulative_reward
    total = 0.0
    for _ in range(draws):
        for _ in range(retry_budget):
            delta = np.asarray(rng.uniform(-half_widths, half_widths))
            perturbed = clip(space, tuple(np.asarray(scenario.params) + delta))
            realized = tuple(p - s for p, s in zip(perturbed, scenario.params))
            norm = math.sqrt(sum(d * d for d in realized))
            # redraw degenerate or hook-invalid probes: the perturbed rollout
            # must itself be a runnable scenario
            if norm >= DEGENERATE_NORM and validate(space, perturbed, env.constraint) is None:
                break
        else:
            raise ValueError("perturbation degenerate after retries")
        # id -1 marks an ephemeral probe; it never enters corpus or genealogy
        probe = Scenario(id=-1, params=perturbed, parent=scenario.id, origin=scenario.origin)
        r_delta = run_episode(env, probe, max_frames).cumulative_reward
        total += abs(r_seed - r_delta) / norm
    return total / draws


def draw_valid_params(
    env: Environment, rng: np.random.Generator, retry_budget: int = 1000
) -> tuple[float, ...]:
    """Uniform draw over the space, resampled until the constraint hook accepts."""
    space = env.space
    for _ in range(retry_budget):
        params = tuple(float(v) for v in rng.uniform(space.lower, space.upper))
        if validate(space, params, env.constraint) is None:
            return params
    raise ValueError(f"no valid sample after {retry_budget} draws")


def init_random(
    env: Environment,
    count: int,
    rng: np.random.Generator,
    *,
    next_id: Callable[[], int],
    grid: DiversityGrid,
    sensitivity_amplitude: float,
    sensitivity_draws: int = 1,
    max_frames: int | None = None,
    capacity: int = 0,
    retry_budget: int = 1000,
) -> Corpus:
    """Seed the corpus with ``count`` uniform scenarios, each rolled out once."""
    if count < 1:
        raise ValueError("count must be >= 1")
    corpus = Corpus(capacity=capacity)
    for _ in range(count):
        params = draw_valid_params(env, rng, retry_budget)
        scenario = Scenario(id=next_id(), params=params, origin=Origin.INITIAL_SAMPLE)
        result = run_episode(env, scenario, max_frames)
        rho = compute_sensitivity(
            env, scenario, sensitivity_amplitude, rng,
            max_frames=max_frames, draws=sensitivity_draws,
        )
        corpus.add(
            CorpusEntry(
                scenario=scenario,
                r_seed=result.cumulative_reward,
                sensitivity=rho,
                potential=-result.cumulative_reward,
                freshness_cell=cell_index(result.trajectory[-1].observation, grid),
                added_at=0,
            )
        )
    return corpus


def sample_seed(
    corpus: Corpus, rng: np.random.Generator, weight_floor: float | None = None
) -> CorpusEntry:
    """Draw an entry with probability proportional to sensitivity + floor.

    The floor (default 1e-3 of the max sensitivity) keeps zero-sensitivity
    entries reachable; when every weight is zero the draw is uniform.
    """
    if not corpus.entries:
        raise ValueError("corpus is empty")
    rhos = [e.sensitivity for e in corpus.entries]
    floor = weight_floor if weight_floor is not None else DEFAULT_WEIGHT_FLOOR_RATIO * max(rhos)
    weights = np.asarray([r + floor for r in rhos], dtype=float)
    total = float(weights.sum())
    if total <= 0.0:
        probs = np.full(len(weights), 1.0 / len(weights))
    else:
        probs = weights / total
    idx = int(rng.choice(len(corpus.entries), p=probs))
    return corpus.entries[idx]


def update_after_test(
    corpus: Corpus,
    seed_entry: CorpusEntry,
    new_scenario: Scenario,
    new_result,
    grid: DiversityGrid,
    env: Environment,
    rng: np.random.Generator,
    *,
    iteration: int,
    sensitivity_amplitude: float,
    sensitivity_draws: int = 1,
    max_frames: int | None = None,
) -> UpdateOutcome:
    """Apply the corpus update rule for one tested scenario.

    Failure removes the seed (critical scenarios leave the pool and are
    recorded by the campaign, never recycled). A surviving scenario is added
    only if it lowered the reward against its seed or its terminal grid cell
    is new to the corpus; otherwise it is discarded.
    """
    if new_result.failed:
        corpus.remove(seed_entry)
        return UpdateOutcome.SEED_REMOVED
    cell = cell_index(new_result.trajectory[-1].observation, grid)
    fresh = cell not in corpus.seen_cells()
    if new_result.cumulative_reward < seed_entry.r_seed or fresh:
        rho = compute_sensitivity(
            env, new_scenario, sensitivity_amplitude, rng,
            max_frames=max_frames, draws=sensitivity_draws,
        )
        corpus.add(
            CorpusEntry(
                scenario=new_scenario,
                r_seed=new_result.cumulative_reward,
                sensitivity=rho,
                potential=-new_result.cumulative_reward,
                freshness_cell=cell,
                added_at=iteration,
            )
        )
        return UpdateOutcome.ADDED_NEW
    return UpdateOutcome.DISCARDED
