"""LLM-backed scenario mutation: prompt rendering, backends, response parsing."""
from __future__ import annotations

import logging

from ..errors import BackendError, GenerationError
from ..space import Scenario, ScenarioSpace, validate
from .backends import HeuristicBackend, HttpBackend, LlmBackend, MockBackend
from .feedback import (
    BadCase,
    BadCaseKind,
    ExpertExperience,
    FeedbackLedger,
    classify_bad_case,
)
from .prompt import (
    ArityMismatch,
    MarkerMissing,
    NumberParseFailure,
    OutOfBounds,
    ParseError,
    PromptTemplate,
    load_template,
    parse_scenario_response,
    render_prompt,
    validate_template,
)

log = logging.getLogger(__name__)


def mutate_via_llm(
    backend: LlmBackend,
    template: PromptTemplate,
    space: ScenarioSpace,
    seed: Scenario,
    feedback: FeedbackLedger,
    experience: ExpertExperience,
    *,
    scenario_id: int,
    constraint=None,
    parse_retries: int = 1,
) -> Scenario:
    """One LLM generation: render -> complete -> parse -> validate.

    Parse or constraint failures get ``parse_retries`` fresh attempts; when
    the final attempt still fails, one Invalidity bad case is appended to the
    feedback ledger and GenerationError is raised. Transport errors propagate
    as BackendError (the backend already retried those internally).
    """
    prompt = render_prompt(template, space, seed, feedback, experience)
    last_detail = "no attempt made"
    last_params: tuple[float, ...] | None = None
    for _ in range(1 + parse_retries):
        text = backend.complete(prompt)
        # surfaced for the tester's benefit only; never fed back into prompts
        log.debug("backend response for seed %d:\n%s", seed.id, text)
        try:
            scenario = parse_scenario_response(
                text, space, template.output_format_marker,
                scenario_id=scenario_id, parent=seed.id,
            )
        except ParseError as exc:
            last_detail = str(exc)
            last_params = getattr(exc, "params", None)
            continue
        reason = validate(space, scenario, constraint)
        if reason is None:
            return scenario
        last_detail = reason
        last_params = scenario.params
    feedback.add(
        BadCase(
            seed_params=seed.params,
            new_params=last_params,
            kind=BadCaseKind.INVALIDITY,
            detail=last_detail,
        )
    )
    raise GenerationError(last_detail)


__all__ = [
    "LlmBackend",
    "MockBackend",
    "HttpBackend",
    "HeuristicBackend",
    "BackendError",
    "GenerationError",
    "BadCase",
    "BadCaseKind",
    "FeedbackLedger",
    "ExpertExperience",
    "classify_bad_case",
    "PromptTemplate",
    "render_prompt",
    "parse_scenario_response",
    "validate_template",
    "load_template",
    "ParseError",
    "MarkerMissing",
    "ArityMismatch",
    "NumberParseFailure",
    "OutOfBounds",
    "mutate_via_llm",
]
