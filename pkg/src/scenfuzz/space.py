"""Scenario parameter space and the geometric primitives shared by every module.

A scenario is a point in a bounded box of reals; everything downstream
(mutation, validation, distance thresholds) happens in this coordinate system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence



class Origin(str, Enum):
    """How a scenario came to exist."""

    INITIAL_SAMPLE = "InitialSample"
    RANDOM_MUTATION = "RandomMutation"
    LLM_MUTATION = "LlmMutation"


@dataclass(frozen=True)
class ScenarioSpace:
    """Axis-aligned box of scenario parameters.

    ``dim_names`` are the human-readable labels used in prompts; they must be
    unique so a rendered state description is unambiguous.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    dim_names: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", tuple(float(x) for x in self.lower))
        object.__setattr__(self, "upper", tuple(float(x) for x in self.upper))
        object.__setattr__(self, "dim_names", tuple(str(n) for n in self.dim_names))
        if len(self.lower) < 1:
            raise ValueError("scenario space needs at least one dimension")
        if not (len(self.lower) == len(self.upper) == len(self.dim_names)):
            raise ValueError(
                f"mismatched lengths: lower={len(self.lower)} upper={len(self.upper)} "
                f"names={len(self.dim_names)}"
            )
        for i, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"dim {i} has non-finite bounds")
            if lo >= hi:
                raise ValueError(f"dim {i}: lower bound {lo} is not below upper bound {hi}")
        if len(set(self.dim_names)) != len(self.dim_names):
            raise ValueError("dim_names must be unique")

    @property
    def dims(self) -> int:
        return len(self.lower)

    @property
    def ranges(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in zip(self.lower, self.upper))


@dataclass(frozen=True)
class Scenario:
    """One point in a scenario space.

    ``id`` is a campaign-assigned monotone integer (never reused within a run);
    ``parent`` links back to the seed it was mutated from, forming a genealogy.
    """

    id: int
    params: tuple[float, ...]
    parent: int | None = None
    origin: Origin = Origin.INITIAL_SAMPLE

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(float(x) for x in self.params))


ConstraintHook = Callable[[Sequence[float]], "str | None"]


def _params_of(value: "Scenario | Sequence[float]") -> tuple[float, ...]:
    if isinstance(value, Scenario):
        return value.params
    return tuple(float(x) for x in value)


def validate(
    space: ScenarioSpace,
    params: "Scenario | Sequence[float]",
    constraint: ConstraintHook | None = None,
) -> str | None:
    """Check a parameter vector against the space (and an optional extra hook).

    Returns ``None`` when valid, otherwise a description of the first violated
    constraint. Invalidity is an ordinary return value, not an exception.
    """
    p = _params_of(params)
    if len(p) != space.dims:
        return f"length {len(p)} != {space.dims}"
    for i, v in enumerate(p):
        if not math.isfinite(v):
            return f"dim {i} ({space.dim_names[i]}) is not a finite number"
        if v < space.lower[i]:
            return f"dim {i} ({space.dim_names[i]}) below lower bound"
        if v > space.upper[i]:
            return f"dim {i} ({space.dim_names[i]}) above upper bound"
    if constraint is not None:
        return constraint(p)
    return None


def clip(space: ScenarioSpace, params: Sequence[float]) -> tuple[float, ...]:
    """Clamp each coordinate into its bounds. Raises on arity mismatch."""
    p = _params_of(params)
    if len(p) != space.dims:
        raise ValueError(f"length {len(p)} != {space.dims}")
    return tuple(min(max(v, lo), hi) for v, lo, hi in zip(p, space.lower, space.upper))


DISTANCE_NORMS = ("l2", "linf")


def distance(
    space: ScenarioSpace,
    a: "Scenario | Sequence[float]",
    b: "Scenario | Sequence[float]",
    norm: str = "l2",
) -> float:
    """Range-normalized distance between two scenarios of the same space.

    Each coordinate difference is divided by that dimension's range first, so
    heterogeneous units compare fairly and modification thresholds are
    unit-free. The default is the L2 norm; "linf" takes the largest
    normalized coordinate difference instead.
    """
    pa, pb = _params_of(a), _params_of(b)
    if len(pa) != space.dims or len(pb) != space.dims:
        raise ValueError(
            f"dimension mismatch: {len(pa)} and {len(pb)} in a {space.dims}-dim space"
        )
    normalized = [abs(x - y) / r for x, y, r in zip(pa, pb, space.ranges)]
    if norm == "linf":
        return max(normalized)
    if norm != "l2":
        raise ValueError(f"unknown norm {norm!r} (known: {', '.join(DISTANCE_NORMS)})")
    return math.sqrt(sum(d * d for d in normalized))
