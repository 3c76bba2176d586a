"""Cooperative-navigation environment: three scripted agents, three landmarks.

Each frame every agent claims a landmark greedily (agents in index order,
each taking its nearest not-yet-claimed landmark, landmark-index ties to the
lower index) and steps toward it at up to 0.2 per frame. The scripted policy
is cautious but deliberately imperfect in two documented ways:

* It throttles its speed by the distance to its nearest neighbour, and a
  naive pairwise repulsion (0.05 away from the nearest neighbour only) kicks
  in once two agents are within 0.25. Ordinary two-agent crossings therefore
  deflect safely — but the avoidance considers one neighbour at a time, so a
  three-way squeeze can push an agent straight into the third party, and
  agents funnelled into a tight region can grind into each other.
* Throttled, repulsed agents make little progress, so crowded endgames can
  run out the 25-frame budget with landmarks still uncovered.

Failure: any inter-agent distance below 0.2 (agent radius 0.1), or some
landmark farther than 0.1 from every agent when the frame budget runs out.
Success ends the episode early once every landmark has an agent within 0.1.
Per-frame reward is -sum_i dist(agent_i, nearest landmark): never positive,
and the slow near-collision grinds the flaws produce are exactly the
episodes with the most negative rewards.

Scenario layout (12 dims): agent1 x/y, agent2 x/y, agent3 x/y, then
landmark1..3 x/y, all in [-1, 1]. The observation each frame uses the same
layout with current agent positions (landmarks are static).

Scenarios that spawn two agents already within collision distance are
rejected by the validity hook: no policy could survive them.
"""
from __future__ import annotations

import math
from typing import Sequence

from ..space import Scenario, ScenarioSpace
from .base import Environment, EnvState, EpisodeResult

N_AGENTS = 3
MAX_STEP = 0.2
REPULSE_RANGE = 0.25
REPULSE_STEP = 0.05
COLLISION_DIST = 0.2
REACH_DIST = 0.1
# Approach speed scales down linearly between these nearest-neighbour gaps.
THROTTLE_FAR = 0.55
THROTTLE_FLOOR = 0.2

SPACE = ScenarioSpace(
    lower=(-1.0,) * 12,
    upper=(1.0,) * 12,
    dim_names=tuple(
        f"{kind}{i}_{axis}"
        for kind in ("agent", "landmark")
        for i in (1, 2, 3)
        for axis in ("x", "y")
    ),
)


def _dist(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _greedy_assignment(
    agents: list[tuple[float, float]], landmarks: list[tuple[float, float]]
) -> list[int]:
    """Landmark index chosen by each agent; agents pick in index order."""
    claimed: set[int] = set()
    assignment = []
    for pos in agents:
        best = min(
            (j for j in range(len(landmarks)) if j not in claimed),
            key=lambda j: (_dist(pos, landmarks[j]), j),
        )
        claimed.add(best)
        assignment.append(best)
    return assignment


def _throttle(gap: float) -> float:
    if gap >= THROTTLE_FAR:
        return 1.0
    return max((gap - REPULSE_RANGE) / (THROTTLE_FAR - REPULSE_RANGE), THROTTLE_FLOOR)


class CoopNav(Environment):
    name = "coop-nav"
    space = SPACE
    default_max_frames = 25
    # Repulsion can push agents slightly outside the unit box.
    observation_lower = (-1.5,) * 12
    observation_upper = (1.5,) * 12

    def constraint(self, params: Sequence[float]) -> str | None:
        agents = [(params[2 * i], params[2 * i + 1]) for i in range(N_AGENTS)]
        for i in range(N_AGENTS):
            for j in range(i + 1, N_AGENTS):
                if _dist(agents[i], agents[j]) < COLLISION_DIST:
                    return f"agents {i + 1} and {j + 1} spawn within collision distance"
        return None

    def _rollout(self, scenario: Scenario, max_frames: int) -> EpisodeResult:
        p = scenario.params
        agents = [(p[2 * i], p[2 * i + 1]) for i in range(N_AGENTS)]
        landmarks = [(p[6 + 2 * i], p[7 + 2 * i]) for i in range(N_AGENTS)]

        def observe(frame: int) -> EnvState:
            flat = [c for pos in agents for c in pos] + [c for pos in landmarks for c in pos]
            return EnvState(tuple(flat), frame)

        def all_reached() -> bool:
            return all(
                min(_dist(a, lm) for a in agents) <= REACH_DIST for lm in landmarks
            )

        def nearest_other(i: int) -> tuple[int, float]:
            j = min(
                (k for k in range(N_AGENTS) if k != i),
                key=lambda k: (_dist(agents[i], agents[k]), k),
            )
            return j, _dist(agents[i], agents[j])

        trajectory = [observe(0)]
        reward = 0.0
        failed = False
        failure_kind = None
        if not all_reached():
            for frame in range(1, max_frames + 1):
                assignment = _greedy_assignment(agents, landmarks)
                moves = []
                for i, pos in enumerate(agents):
                    target = landmarks[assignment[i]]
                    d = _dist(pos, target)
                    neighbour, gap = nearest_other(i)
                    step = min(MAX_STEP, d) * _throttle(gap)
                    if d == 0.0:
                        mv = (0.0, 0.0)
                    else:
                        mv = ((target[0] - pos[0]) / d * step, (target[1] - pos[1]) / d * step)
                    if gap < REPULSE_RANGE:
                        # naive: reacts to the nearest neighbour only, so a
                        # third agent can sit exactly where this push lands
                        other = agents[neighbour]
                        if gap == 0.0:
                            away = (1.0, 0.0) if i < neighbour else (-1.0, 0.0)
                        else:
                            away = ((pos[0] - other[0]) / gap, (pos[1] - other[1]) / gap)
                        mv = (mv[0] + away[0] * REPULSE_STEP, mv[1] + away[1] * REPULSE_STEP)
                    moves.append(mv)
                agents = [
                    (pos[0] + mv[0], pos[1] + mv[1]) for pos, mv in zip(agents, moves)
                ]
                trajectory.append(observe(frame))
                reward -= sum(
                    min(_dist(a, lm) for lm in landmarks) for a in agents
                )
                collided = any(
                    _dist(agents[i], agents[j]) < COLLISION_DIST
                    for i in range(N_AGENTS)
                    for j in range(i + 1, N_AGENTS)
                )
                if collided:
                    failed = True
                    failure_kind = "agent-collision"
                    break
                if all_reached():
                    break
                if frame == max_frames:
                    failed = True
                    failure_kind = "landmark-unreached"

        return EpisodeResult(
            cumulative_reward=reward,
            frames=len(trajectory) - 1,
            failed=failed,
            failure_kind=failure_kind,
            trajectory=tuple(trajectory),
        )
