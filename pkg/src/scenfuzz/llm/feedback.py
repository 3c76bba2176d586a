"""Bad-case classification and the bounded feedback ledger fed into prompts."""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from enum import Enum

from ..space import Scenario, ScenarioSpace, distance

DEFAULT_FEEDBACK_CAP = 5


class BadCaseKind(str, Enum):
    INSUFFICIENT_CHALLENGE = "InsufficientChallenge"
    INVALIDITY = "Invalidity"
    EXCESSIVE_MODIFICATION = "ExcessiveModification"


@dataclass(frozen=True)
class BadCase:
    """A rejected generated scenario plus why it was rejected.

    ``new_params`` is None when the response never yielded a parameter vector.
    """

    seed_params: tuple[float, ...]
    new_params: tuple[float, ...] | None
    kind: BadCaseKind
    detail: str


class FeedbackLedger:
    """Bounded FIFO of the most recent bad cases; single writer (orchestrator)."""

    def __init__(self, cap: int = DEFAULT_FEEDBACK_CAP):
        if cap < 1:
            raise ValueError("cap must be >= 1")
        self.cap = cap
        self._cases: deque[BadCase] = deque(maxlen=cap)
        self.counts: Counter[BadCaseKind] = Counter()

    def add(self, case: BadCase) -> None:
        self._cases.append(case)
        self.counts[case.kind] += 1

    def __len__(self) -> int:
        return len(self._cases)

    def __iter__(self):
        return iter(self._cases)


@dataclass(frozen=True)
class ExpertExperience:
    """Free-text mutation plans a tester wants the generator to lean on."""

    plans: tuple[str, ...] = ()


def classify_bad_case(
    space: ScenarioSpace,
    seed: Scenario,
    new: Scenario | None,
    seed_reward: float,
    new_reward: float | None,
    reward_threshold: float,
    distance_threshold: float,
    error: str | None = None,
    norm: str = "l2",
) -> BadCase | None:
    """Classify one generated scenario against the three rejection criteria.

    Precedence: Invalidity (never ran, rewards untrustworthy), then
    ExcessiveModification (strayed too far from the seed), then
    InsufficientChallenge (reward rose too much). None means acceptable.
    """
    if reward_threshold <= 0 or distance_threshold <= 0:
        raise ValueError("thresholds must be positive")
    if error is not None or new is None or new_reward is None:
        return BadCase(
            seed_params=seed.params,
            new_params=new.params if new is not None else None,
            kind=BadCaseKind.INVALIDITY,
            detail=error or "scenario could not be tested",
        )
    d = distance(space, seed, new, norm)
    if d > distance_threshold:
        return BadCase(
            seed_params=seed.params,
            new_params=new.params,
            kind=BadCaseKind.EXCESSIVE_MODIFICATION,
            detail=f"normalized distance {d:.6g} exceeds the limit {distance_threshold:.6g}",
        )
    rise = new_reward - seed_reward
    if rise > reward_threshold:
        return BadCase(
            seed_params=seed.params,
            new_params=new.params,
            kind=BadCaseKind.INSUFFICIENT_CHALLENGE,
            detail=f"reward rose by {rise:.6g}, more than the allowed {reward_threshold:.6g}",
        )
    return None
