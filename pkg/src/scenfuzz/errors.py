"""Exception hierarchy; the CLI maps these onto exit codes."""
from __future__ import annotations


class ScenfuzzError(Exception):
    """Base class for every error this package raises deliberately."""


class ConfigError(ScenfuzzError):
    """Bad config file, unknown override key, invalid parameter value."""


class TemplateError(ScenfuzzError):
    """A prompt template file is malformed or does not match its space."""


class BackendError(ScenfuzzError):
    """An LLM backend is unreachable or returned an unusable transport-level response."""


class GenerationError(ScenfuzzError):
    """The LLM mutator failed to produce a usable scenario after retries."""


class ReplayDivergenceError(ScenfuzzError):
    """A persisted failure did not reproduce on replay; signals a determinism bug."""


class CampaignError(ScenfuzzError):
    """The campaign loop could not complete (e.g. generation kept failing)."""
