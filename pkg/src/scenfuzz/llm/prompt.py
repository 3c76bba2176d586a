"""Prompt template type, rendering, and response parsing.

A rendered prompt has four blocks in a fixed order — Instruction, Scenario
Information, Input, Output — and the model must answer with a line of the
form ``New Scenario: [v1, ..., vD]``. Parameters are serialized with Python
float repr, which round-trips bit-exactly.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from ..errors import ScenfuzzError, TemplateError
from ..space import Origin, Scenario, ScenarioSpace
from .feedback import ExpertExperience, FeedbackLedger

DEFAULT_MARKER = "New Scenario:"

DEFAULT_WORKFLOW = (
    "Scenario Analysis: describe the seed scenario's initial state, the agents "
    "involved and the relationships between them.",
    "Evolution Prediction: predict how the scenario will evolve — trajectories, "
    "interactions, and the likely outcome for the policy under test.",
    "Challenge Analysis: identify how the decision-making task could be made to "
    "fail and state the idea behind it.",
    "Plan Generation: write a concrete plan for modifying the seed scenario.",
    "Plan Execution: carry the plan out and produce the new scenario in the same "
    "format as the input.",
)

DEFAULT_INPUT_LAYOUT = """### Seed Scenario
{{seed}}
### Testing Feedback
{{feedback}}
### Expert Experience
{{experience}}"""

_SLOTS = ("{{seed}}", "{{feedback}}", "{{experience}}")


class ParseError(ScenfuzzError):
    """The model response could not be turned into a valid scenario."""


class MarkerMissing(ParseError):
    pass


class ArityMismatch(ParseError):
    pass


class NumberParseFailure(ParseError):
    pass


class OutOfBounds(ParseError):
    def __init__(self, message: str, dim: int, params: tuple[float, ...]):
        super().__init__(message)
        self.dim = dim
        self.params = params


@dataclass(frozen=True)
class PromptTemplate:
    """Environment-specific prompt blocks; the variable parts are slotted in
    at render time."""

    role_assignment: str
    task_introduction: str
    overview: str
    entity_information: str
    state_description: str
    constraints: tuple[str, ...]
    generation_workflow: tuple[str, ...] = DEFAULT_WORKFLOW
    output_format_marker: str = DEFAULT_MARKER
    input_layout: str = DEFAULT_INPUT_LAYOUT


def format_params(params) -> str:
    return "[" + ", ".join(repr(float(v)) for v in params) + "]"


def validate_template(template: PromptTemplate, space: ScenarioSpace) -> list[str]:
    """Problems that make the template unusable for this space; empty = valid."""
    problems = []
    for name in (
        "role_assignment", "task_introduction", "overview",
        "entity_information", "state_description",
    ):
        if not getattr(template, name).strip():
            problems.append(f"block {name!r} is empty")
    if not template.constraints:
        problems.append("no constraints listed")
    if len(template.generation_workflow) != 5:
        problems.append(
            f"generation workflow has {len(template.generation_workflow)} steps, expected 5"
        )
    if not template.output_format_marker.strip():
        problems.append("output format marker is empty")
    for slot in _SLOTS:
        if slot not in template.input_layout:
            problems.append(f"input layout is missing the {slot} slot")
    for name in space.dim_names:
        if name not in template.state_description:
            problems.append(f"state description does not mention dimension {name!r}")
    return problems


def _seed_block(space: ScenarioSpace, seed: Scenario) -> str:
    lines = [f"Seed scenario: {format_params(seed.params)}"]
    for name, value, lo, hi in zip(space.dim_names, seed.params, space.lower, space.upper):
        lines.append(f"- {name} = {value!r} (valid range [{lo:g}, {hi:g}])")
    return "\n".join(lines)


def _feedback_block(feedback: FeedbackLedger | None) -> str:
    if feedback is None or len(feedback) == 0:
        return "None"
    lines = []
    for case in feedback:
        generated = format_params(case.new_params) if case.new_params is not None else "unparseable"
        lines.append(
            f"- [{case.kind.value}] seed={format_params(case.seed_params)} "
            f"generated={generated}: {case.detail}"
        )
    return "\n".join(lines)


def _experience_block(experience: ExpertExperience | None) -> str:
    if experience is None or not experience.plans:
        return "None"
    return "\n".join(f"- {plan}" for plan in experience.plans)


def render_prompt(
    template: PromptTemplate,
    space: ScenarioSpace,
    seed: Scenario,
    feedback: FeedbackLedger | None = None,
    experience: ExpertExperience | None = None,
) -> str:
    """Compose the full prompt text; deterministic for identical inputs."""
    problems = validate_template(template, space)
    if problems:
        raise TemplateError("; ".join(problems))
    if len(seed.params) != space.dims:
        raise TemplateError(
            f"seed has {len(seed.params)} params but the space has {space.dims} dims"
        )
    input_block = (
        template.input_layout
        .replace("{{seed}}", _seed_block(space, seed))
        .replace("{{feedback}}", _feedback_block(feedback))
        .replace("{{experience}}", _experience_block(experience))
    )
    constraints = "\n".join(f"- {c}" for c in template.constraints)
    workflow = "\n".join(
        f"{i}. {step}" for i, step in enumerate(template.generation_workflow, start=1)
    )
    return f"""## Instruction
{template.role_assignment.strip()}
{template.task_introduction.strip()}

## Scenario Information
### Overview
{template.overview.strip()}
### Entity Information
{template.entity_information.strip()}
### State Description
{template.state_description.strip()}
### Constraints
{constraints}

## Input
{input_block}

## Output
Work through the following steps:
{workflow}
Then output the new scenario on its own line in exactly this form:
{template.output_format_marker} [{", ".join(space.dim_names)}]
where the bracketed list holds {space.dims} numbers inside the stated bounds.
Finally, explain briefly why the new scenario is more challenging than the seed.
"""


_NUMBER_LIST = re.compile(r"\[([^\][]*)\]")


def parse_scenario_response(
    text: str,
    space: ScenarioSpace,
    marker: str = DEFAULT_MARKER,
    *,
    scenario_id: int,
    parent: int | None = None,
) -> Scenario:
    """Extract the scenario after the LAST occurrence of the marker.

    Raises MarkerMissing / NumberParseFailure / ArityMismatch / OutOfBounds;
    out-of-bounds output is rejected, never clipped, so the feedback loop can
    report it back to the generator.
    """
    pos = text.rfind(marker)
    if pos < 0:
        raise MarkerMissing(f"response does not contain the marker {marker!r}")
    tail = text[pos + len(marker):]
    m = _NUMBER_LIST.search(tail)
    if m is None:
        raise NumberParseFailure("no bracketed number list follows the marker")
    raw_items = [item.strip() for item in m.group(1).split(",") if item.strip()]
    values = []
    for item in raw_items:
        try:
            values.append(float(item))
        except ValueError:
            raise NumberParseFailure(f"cannot parse {item!r} as a number") from None
    if len(values) != space.dims:
        raise ArityMismatch(f"expected {space.dims} values, got {len(values)}")
    params = tuple(values)
    for i, v in enumerate(params):
        if v != v or v in (float("inf"), float("-inf")):
            raise NumberParseFailure(f"dim {i} is not finite")
        if v < space.lower[i]:
            raise OutOfBounds(
                f"dim {i} ({space.dim_names[i]}) below lower bound", i, params
            )
        if v > space.upper[i]:
            raise OutOfBounds(
                f"dim {i} ({space.dim_names[i]}) above upper bound", i, params
            )
    return Scenario(id=scenario_id, params=params, parent=parent, origin=Origin.LLM_MUTATION)


_SECTION_RE = re.compile(r"^\[([a-z_]+)\]\s*$", re.MULTILINE)
_REQUIRED_SECTIONS = ("role", "task", "overview", "entities", "state", "constraints")
_KNOWN_SECTIONS = _REQUIRED_SECTIONS + ("input", "workflow", "marker")


def load_template(path: str | Path) -> PromptTemplate:
    """Parse a sectioned plain-text template file.

    Sections are introduced by a ``[name]`` line; required: role, task,
    overview, entities, state, constraints. Optional: input (must contain the
    three placeholder slots), workflow (five lines), marker.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TemplateError(f"cannot read template {path}: {exc}") from exc
    matches = list(_SECTION_RE.finditer(text))
    if not matches:
        raise TemplateError(f"{path}: no [section] headers found")
    sections: dict[str, str] = {}
    for i, m in enumerate(matches):
        name = m.group(1)
        if name not in _KNOWN_SECTIONS:
            raise TemplateError(f"{path}: unknown section [{name}]")
        if name in sections:
            raise TemplateError(f"{path}: duplicate section [{name}]")
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        sections[name] = text[m.end():end].strip()
    missing = [s for s in _REQUIRED_SECTIONS if s not in sections]
    if missing:
        raise TemplateError(f"{path}: missing sections {missing}")
    constraints = tuple(
        line.lstrip("- ").strip()
        for line in sections["constraints"].splitlines()
        if line.strip()
    )
    workflow: tuple[str, ...] = DEFAULT_WORKFLOW
    if "workflow" in sections:
        workflow = tuple(
            re.sub(r"^\d+\.\s*", "", line.strip())
            for line in sections["workflow"].splitlines()
            if line.strip()
        )
    return PromptTemplate(
        role_assignment=sections["role"],
        task_introduction=sections["task"],
        overview=sections["overview"],
        entity_information=sections["entities"],
        state_description=sections["state"],
        constraints=constraints,
        generation_workflow=workflow,
        output_format_marker=sections.get("marker", DEFAULT_MARKER).strip(),
        input_layout=sections.get("input", DEFAULT_INPUT_LAYOUT),
    )
