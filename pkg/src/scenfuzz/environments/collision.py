"""2D aircraft collision-avoidance environment with a deliberately flawed policy.

Geometry
--------
The ownship starts at the origin heading along +x; the intruder flies a
straight line at constant speed and heading. One frame is one second. Each
frame the scripted policy picks a turn rate from {-3, 0, +3} degrees, then
both aircraft advance.

The policy's documented flaws (these are what a tester should exploit):

* It only reacts when the intruder is closer than 1500 m.
* It is blind to approaches whose apparent velocity points within 10 degrees
  of dead astern in the ownship body frame (the "stern cone" in relative
  velocity space). A pure head-on closure, or a pure overtake along the body
  axis, produces exactly such an approach vector, so the policy never evades
  it. For collision-course geometries this coincides with the intruder
  sitting within ~10 degrees of the nose.

Failure is separation below 150 m; the range check uses the continuous
minimum over each one-second step so fast closures cannot step over the
collision window. Per-frame reward is min(range, 2000)/2000 measured at the
end of the frame, so persistent proximity drives the cumulative reward down.

Observation layout (6 dims): ownship x, ownship y, ownship heading,
intruder x, intruder y, range.
"""
from __future__ import annotations

import math

from ..space import Scenario, ScenarioSpace
from .base import Environment, EnvState, EpisodeResult

COLLISION_RANGE = 150.0
REACTION_RANGE = 1500.0
BLIND_HALF_ANGLE = math.radians(10.0)
TURN_RATE = math.radians(3.0)
REWARD_RANGE_CAP = 2000.0
DT = 1.0

SPACE = ScenarioSpace(
    lower=(500.0, -3000.0, -math.pi, 50.0, 50.0),
    upper=(5000.0, 3000.0, math.pi, 200.0, 200.0),
    dim_names=(
        "intruder_x",
        "intruder_y",
        "intruder_heading",
        "ownship_speed",
        "intruder_speed",
    ),
)


def _wrap(angle: float) -> float:
    """Wrap into (-pi, pi]."""
    a = math.fmod(angle + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


def _segment_min_range(px: float, py: float, dx: float, dy: float) -> float:
    """Minimum of |p + t*d| over t in [0, 1]."""
    dd = dx * dx + dy * dy
    if dd == 0.0:
        return math.hypot(px, py)
    t = -(px * dx + py * dy) / dd
    t = min(max(t, 0.0), 1.0)
    return math.hypot(px + t * dx, py + t * dy)


class CollisionAvoidance2D(Environment):
    name = "collision-avoidance-2d"
    space = SPACE
    default_max_frames = 100
    # Loose but fixed envelopes: neither aircraft can travel more than
    # 200 m/s * 100 frames from its start region.
    observation_lower = (-20000.0, -20000.0, -math.pi, -15500.0, -23000.0, 0.0)
    observation_upper = (20000.0, 20000.0, math.pi, 25000.0, 23000.0, 50000.0)

    def _policy_turn(
        self,
        own_x: float,
        own_y: float,
        own_heading: float,
        intr_x: float,
        intr_y: float,
        intr_heading: float,
        own_speed: float,
        intr_speed: float,
    ) -> float:
        rng = math.hypot(intr_x - own_x, intr_y - own_y)
        if rng >= REACTION_RANGE:
            return 0.0
        rel_vx = intr_speed * math.cos(intr_heading) - own_speed * math.cos(own_heading)
        rel_vy = intr_speed * math.sin(intr_heading) - own_speed * math.sin(own_heading)
        approach = _wrap(math.atan2(rel_vy, rel_vx) - own_heading)
        if abs(_wrap(approach - math.pi)) <= BLIND_HALF_ANGLE:
            return 0.0  # blind spot: approach vector points sternward
        bearing = _wrap(math.atan2(intr_y - own_y, intr_x - own_x) - own_heading)
        return -TURN_RATE if bearing >= 0.0 else TURN_RATE

    def _rollout(self, scenario: Scenario, max_frames: int) -> EpisodeResult:
        intr_x, intr_y, intr_heading, own_speed, intr_speed = scenario.params
        own_x, own_y, own_heading = 0.0, 0.0, 0.0
        intr_vx = intr_speed * math.cos(intr_heading)
        intr_vy = intr_speed * math.sin(intr_heading)

        def observe(frame: int) -> EnvState:
            rng = math.hypot(intr_x - own_x, intr_y - own_y)
            return EnvState((own_x, own_y, own_heading, intr_x, intr_y, rng), frame)

        trajectory = [observe(0)]
        reward = 0.0
        failed = False
        for frame in range(1, max_frames + 1):
            turn = self._policy_turn(
                own_x, own_y, own_heading,
                intr_x, intr_y, intr_heading, own_speed, intr_speed,
            )
            own_heading = _wrap(own_heading + turn)
            rel_x = intr_x - own_x
            rel_y = intr_y - own_y
            own_dx = own_speed * math.cos(own_heading) * DT
            own_dy = own_speed * math.sin(own_heading) * DT
            step_min = _segment_min_range(
                rel_x, rel_y, intr_vx * DT - own_dx, intr_vy * DT - own_dy
            )
            own_x += own_dx
            own_y += own_dy
            intr_x += intr_vx * DT
            intr_y += intr_vy * DT
            trajectory.append(observe(frame))
            end_range = trajectory[-1].observation[5]
            reward += min(end_range, REWARD_RANGE_CAP) / REWARD_RANGE_CAP
            if step_min < COLLISION_RANGE:
                failed = True
                break

        return EpisodeResult(
            cumulative_reward=reward,
            frames=len(trajectory) - 1,
            failed=failed,
            failure_kind="collision" if failed else None,
            trajectory=tuple(trajectory),
        )
