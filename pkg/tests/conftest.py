from __future__ import annotations

import numpy as np
import pytest

from scenfuzz.environments import create_environment
from scenfuzz.environments.base import Environment, EnvState, EpisodeResult
from scenfuzz.space import Scenario, ScenarioSpace

UNIT_SQUARE = ScenarioSpace(lower=(0.0, 0.0), upper=(1.0, 1.0), dim_names=("x", "y"))


class FakeEnv(Environment):
    """Minimal deterministic environment for corpus/generator tests.

    Reward and failure are arbitrary functions of the scenario parameters;
    the observation is the parameter vector itself.
    """

    name = "fake"
    space = UNIT_SQUARE
    default_max_frames = 5
    observation_lower = (0.0, 0.0)
    observation_upper = (1.0, 1.0)

    def __init__(self, reward_fn=None, fail_fn=None, constraint_fn=None):
        self.reward_fn = reward_fn or (lambda p: 0.0)
        self.fail_fn = fail_fn or (lambda p: False)
        self.constraint_fn = constraint_fn

    def constraint(self, params):
        if self.constraint_fn is None:
            return None
        return self.constraint_fn(params)

    def _rollout(self, scenario, max_frames):
        failed = bool(self.fail_fn(scenario.params))
        return EpisodeResult(
            cumulative_reward=float(self.reward_fn(scenario.params)),
            frames=1,
            failed=failed,
            failure_kind="fake-failure" if failed else None,
            trajectory=(
                EnvState(scenario.params, 0),
                EnvState(scenario.params, 1),
            ),
        )


class StubRng:
    """Stands in for numpy's Generator where a test needs exact draws."""

    def __init__(self, uniforms):
        self._uniforms = list(uniforms)

    def uniform(self, low, high, size=None):
        if not self._uniforms:
            raise AssertionError("stub rng ran out of scripted draws")
        return np.asarray(self._uniforms.pop(0), dtype=float)


def pytest_addoption(parser):
    parser.addoption(
        "--http-live",
        action="store_true",
        default=False,
        help="run the opt-in live HTTP backend integration test",
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_square():
    return UNIT_SQUARE


@pytest.fixture
def collision_env():
    return create_environment("collision-avoidance-2d")


@pytest.fixture
def coopnav_env():
    return create_environment("coop-nav")


def make_scenario(params, sid=0, parent=None):
    return Scenario(id=sid, params=tuple(params), parent=parent)
