"""Built-in environments and the extension registry.

Downstream users register additional environments by name without touching
the framework:

    register_environment("my-env", MyEnv)
"""
from __future__ import annotations

from typing import Callable

from ..errors import ConfigError
from .base import Environment, EnvState, EpisodeResult, run_episode
from .collision import CollisionAvoidance2D
from .coopnav import CoopNav

_REGISTRY: dict[str, Callable[[], Environment]] = {}


def register_environment(name: str, factory: Callable[[], Environment]) -> None:
    _REGISTRY[name] = factory


def create_environment(name: str) -> Environment:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise ConfigError(f"unknown environment {name!r} (known: {known})") from None
    return factory()


def environment_names() -> list[str]:
    return sorted(_REGISTRY)


register_environment(CollisionAvoidance2D.name, CollisionAvoidance2D)
register_environment(CoopNav.name, CoopNav)

__all__ = [
    "Environment",
    "EnvState",
    "EpisodeResult",
    "run_episode",
    "CollisionAvoidance2D",
    "CoopNav",
    "register_environment",
    "create_environment",
    "environment_names",
]
