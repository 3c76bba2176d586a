"""Multi-scale scenario generation: random mutation, percentile dispatch,
and the adaptive share of high-potential seeds.

The dispatch rule: seeds whose potential falls in the top alpha percent of
the corpus are near-failure and get a small random perturbation (fine local
search); everything else goes to the LLM mutator (large, environment-aware
edits). alpha itself adapts to the failure rate: it decays by beta when the
rate drops below a (1 - delta) tolerance band and is raised by 1/beta when
the rate climbs above (1 + delta), clamped to (0, 100].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .corpus import CorpusEntry
from .errors import GenerationError
from .space import Origin, Scenario, ScenarioSpace, clip, validate

PERCENTILE_METHODS = ("nearest-rank", "linear")


@dataclass
class GeneratorState:
    """Mutable dispatch parameters; owned solely by the campaign orchestrator."""

    alpha: float
    beta: float
    delta: float
    amplitude: float
    last_rate: float | None = None
    llm_calls: int = 0
    random_calls: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 100.0:
            raise ValueError("alpha must be in (0, 100]")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must be in (0, 1)")
        if self.delta < 0.0:
            raise ValueError("delta must be nonnegative")
        if self.amplitude <= 0.0:
            raise ValueError("amplitude must be positive")


def random_mutation(
    space: ScenarioSpace,
    seed: Scenario,
    amplitude: float,
    rng: np.random.Generator,
    scenario_id: int,
) -> Scenario:
    """Perturb each coordinate by U(-amplitude*range_i, +amplitude*range_i), clipped."""
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    half_widths = np.asarray(space.ranges) * amplitude
    delta = rng.uniform(-half_widths, half_widths)
    params = clip(space, tuple(np.asarray(seed.params) + delta))
    return Scenario(
        id=scenario_id, params=params, parent=seed.id, origin=Origin.RANDOM_MUTATION
    )


def constrained_random_mutation(
    space: ScenarioSpace,
    seed: Scenario,
    amplitude: float,
    rng: np.random.Generator,
    scenario_id: int,
    constraint=None,
    retry_budget: int = 100,
) -> Scenario:
    """random_mutation redrawn until an optional environment hook accepts it."""
    for _ in range(retry_budget):
        candidate = random_mutation(space, seed, amplitude, rng, scenario_id)
        if constraint is None or validate(space, candidate, constraint) is None:
            return candidate
    raise GenerationError(
        f"random mutation of seed {seed.id} violated the environment constraint "
        f"{retry_budget} times"
    )


def percentile(values: Sequence[float], q: float, method: str = "nearest-rank") -> float:
    """q-quantile of ``values``; nearest-rank takes sorted[ceil(q*n) - 1]."""
    if not values:
        raise ValueError("values must be non-empty")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must be in [0, 1]")
    if method == "linear":
        return float(np.quantile(np.asarray(values, dtype=float), q))
    if method != "nearest-rank":
        raise ValueError(f"unknown percentile method {method!r}")
    ordered = sorted(float(v) for v in values)
    if q == 0.0:
        return ordered[0]
    rank = math.ceil(q * len(ordered))
    return ordered[min(rank, len(ordered)) - 1]


def classify_potential(
    p_s: float, potentials: Sequence[float], alpha: float, method: str = "nearest-rank"
) -> bool:
    """True when the potential lands in the top alpha percent of the corpus.

    Ties at the threshold count as high potential.
    """
    threshold = percentile(potentials, 1.0 - alpha / 100.0, method)
    return p_s >= threshold


def generate(
    state: GeneratorState,
    seed_entry: CorpusEntry,
    potentials: Sequence[float],
    llm_mutator: Callable[[Scenario], Scenario],
    rng: np.random.Generator,
    *,
    space: ScenarioSpace,
    next_id: Callable[[], int],
    constraint=None,
    percentile_method: str = "nearest-rank",
) -> Scenario:
    """Dispatch one generation: small random step for high-potential seeds,
    LLM mutation for the rest. Counters track which side ran; LLM mutator
    errors propagate after the call is counted.
    """
    high = classify_potential(
        seed_entry.potential, potentials, state.alpha, percentile_method
    )
    if high:
        state.random_calls += 1
        return constrained_random_mutation(
            space, seed_entry.scenario, state.amplitude, rng, next_id(),
            constraint=constraint,
        )
    state.llm_calls += 1
    return llm_mutator(seed_entry.scenario)


def update_alpha(state: GeneratorState, new_rate: float) -> GeneratorState:
    """Adapt alpha after a newly discovered failure.

    The first failure only records the rate. Afterwards: a rate below
    (1 - delta) * last_rate shrinks alpha by beta, a rate above
    (1 + delta) * last_rate grows it by 1/beta (clamped at 100); last_rate
    moves only when alpha changes.
    """
    if not 0.0 <= new_rate <= 1.0:
        raise ValueError(f"failure rate must be in [0, 1], got {new_rate}")
    if state.last_rate is None:
        state.last_rate = new_rate
        return state
    if new_rate < (1.0 - state.delta) * state.last_rate:
        state.alpha = state.alpha * state.beta
        state.last_rate = new_rate
    elif new_rate > (1.0 + state.delta) * state.last_rate:
        state.alpha = min(state.alpha / state.beta, 100.0)
        state.last_rate = new_rate
    return state
