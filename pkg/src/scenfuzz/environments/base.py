"""Environment/policy behavioral contract and the episode result types."""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

from ..space import Scenario, ScenarioSpace, validate


@dataclass(frozen=True)
class EnvState:
    """Observation snapshot at one frame; layout is documented per environment."""

    observation: tuple[float, ...]
    frame: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "observation", tuple(float(x) for x in self.observation))


@dataclass(frozen=True)
class EpisodeResult:
    """Outcome of one policy rollout.

    ``trajectory[0]`` is the initial state at frame 0;
    ``frames == len(trajectory) - 1``; a failed episode ends at the frame the
    failure occurred.
    """

    cumulative_reward: float
    frames: int
    failed: bool
    failure_kind: str | None
    trajectory: tuple[EnvState, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "cumulative_reward", float(self.cumulative_reward))
        object.__setattr__(self, "trajectory", tuple(self.trajectory))
        if not self.trajectory:
            raise ValueError("trajectory must be non-empty")
        if self.trajectory[0].frame != 0:
            raise ValueError("trajectory must start at frame 0")
        if self.frames != len(self.trajectory) - 1:
            raise ValueError("frames must equal trajectory length - 1")
        if self.failed and self.failure_kind is None:
            raise ValueError("failed episode needs a failure_kind")


class Environment(ABC):
    """A deterministic simulated task plus the scripted policy under test.

    Instances hold per-episode mutable state and must not be shared across
    concurrent rollouts; create one instance per worker.
    """

    name: str
    space: ScenarioSpace
    default_max_frames: int
    # Fixed per-environment observation bounds; the campaign bins terminal
    # states against these for corpus freshness.
    observation_lower: tuple[float, ...]
    observation_upper: tuple[float, ...]

    def constraint(self, params: Sequence[float]) -> str | None:
        """Extra validity check beyond box bounds; None means acceptable."""
        return None

    @abstractmethod
    def _rollout(self, scenario: Scenario, max_frames: int) -> EpisodeResult:
        """Simulate from the scenario's initial conditions; must be deterministic."""


def run_episode(env: Environment, scenario: Scenario, max_frames: int | None = None) -> EpisodeResult:
    """Validate and roll out one episode.

    Deterministic: identical (scenario, max_frames) always yields a
    bit-identical result.
    """
    if max_frames is None:
        max_frames = env.default_max_frames
    if max_frames <= 0:
        raise ValueError(f"max_frames must be positive, got {max_frames}")
    reason = validate(env.space, scenario, env.constraint)
    if reason is not None:
        raise ValueError(f"invalid scenario {scenario.id}: {reason}")
    return env._rollout(scenario, max_frames)
