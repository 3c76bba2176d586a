"""Scenario potential, failure-rate tracking, and grid-based diversity metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .environments.base import EpisodeResult


def potential_of(result: EpisodeResult) -> float:
    """Potential P = -cumulative reward: low reward means near-failure."""
    return -result.cumulative_reward


@dataclass(frozen=True)
class DiversityGrid:
    """Per-dimension equal-interval binning over an observed value envelope."""

    intervals: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", tuple(float(x) for x in self.lower))
        object.__setattr__(self, "upper", tuple(float(x) for x in self.upper))
        if self.intervals < 1:
            raise ValueError("intervals must be >= 1")
        if len(self.lower) != len(self.upper):
            raise ValueError("lower/upper length mismatch")
        for i, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if lo > hi:
                raise ValueError(f"dim {i}: min {lo} exceeds max {hi}")

    @property
    def dims(self) -> int:
        return len(self.lower)


def cell_index(state: Sequence[float], grid: DiversityGrid) -> tuple[int, ...]:
    """Grid cell of a state vector; values at/over the max clamp into the last cell."""
    if len(state) != grid.dims:
        raise ValueError(f"state length {len(state)} != grid dims {grid.dims}")
    idx = []
    for v, lo, hi in zip(state, grid.lower, grid.upper):
        if hi == lo:
            idx.append(0)  # degenerate dimension: single cell
            continue
        width = (hi - lo) / grid.intervals
        k = math.floor((v - lo) / width)
        idx.append(min(max(k, 0), grid.intervals - 1))
    return tuple(idx)


class DiversityCounts(NamedTuple):
    n_initial: int
    n_terminal: int
    n_entire: int


def grid_from_states(states: Iterable[Sequence[float]], intervals: int) -> DiversityGrid:
    """Grid over the observed per-dimension min/max of the given states."""
    lower: list[float] | None = None
    upper: list[float] | None = None
    for s in states:
        if lower is None:
            lower = [float(x) for x in s]
            upper = [float(x) for x in s]
            continue
        for i, x in enumerate(s):
            if x < lower[i]:
                lower[i] = float(x)
            if x > upper[i]:
                upper[i] = float(x)
    if lower is None or upper is None:
        raise ValueError("no states given")
    return DiversityGrid(intervals=intervals, lower=tuple(lower), upper=tuple(upper))


def diversity_counts(
    trajectories: Sequence[Sequence[Sequence[float]]], intervals: int
) -> DiversityCounts:
    """Distinct grid cells among initial, terminal, and all states of the trajectories.

    The grid envelope is the observed min/max over every state in the input
    set, so counts are only comparable within one analyzed set.
    """
    if not trajectories:
        raise ValueError("need at least one trajectory")
    for t in trajectories:
        if not t:
            raise ValueError("trajectories must be non-empty")
    grid = grid_from_states((s for t in trajectories for s in t), intervals)
    initial = {cell_index(t[0], grid) for t in trajectories}
    terminal = {cell_index(t[-1], grid) for t in trajectories}
    entire = {cell_index(s, grid) for t in trajectories for s in t}
    return DiversityCounts(len(initial), len(terminal), len(entire))


@dataclass
class MetricsTracker:
    """Per-iteration outcome log; single writer (the campaign orchestrator)."""

    tests_run: int = 0
    failures_found: int = 0
    # (iteration, failed, origin, alpha at generation time or None)
    rows: list[tuple[int, bool, str, float | None]] = field(default_factory=list)

    def record(self, failed: bool, origin: str, alpha: float | None) -> None:
        self.tests_run += 1
        if failed:
            self.failures_found += 1
        self.rows.append((self.tests_run, failed, origin, alpha))

    def failure_rate(self, window: int = 0) -> float:
        """Failures per test; over the last ``window`` tests when window > 0."""
        if self.tests_run == 0:
            raise ValueError("no tests recorded yet")
        if window and window > 0:
            rows = self.rows[-window:]
            return sum(1 for r in rows if r[1]) / len(rows)
        return self.failures_found / self.tests_run
