"""Prompt template catalogue and chain-of-thought prompt assembly.

Every prompt is built from four parts in a fixed order: the template core
(context, facts, question), the particular statement "Let's think step by
step.", output-format instructions, and an output example. Template cores
live as plain-text files beside this module, one per template_id, with
brace-delimited slots; ``build_prompt`` is a pure function of
(template_id, slot_values).

A slot may repeat inside a core (decide/act templates reuse {Time} for
"now" and for the last post's time); pass a list to feed occurrences in
document order, or a scalar to broadcast.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence, Union

from .errors import TemplateError

CATALOGUE_VERSION = 1

STEP_DIRECTIVE = "Let's think step by step."

_SLOT_RE = re.compile(r"\{([^{}]+)\}")

_JSON_DECIDE_INSTRUCTIONS = (
    "Output the response to the prompt above.\n"
    "The output should contain two parts (Reasoning and Answer).\n"
    "The output should be in JSON."
)
_DECIDE_EXAMPLE = '{"Reasoning": "why the agent would or would not act", "Answer": "Yes"}'


@dataclass(frozen=True)
class TemplateSpec:
    template_id: str
    instructions: str
    output_example: str
    habit_slots: tuple[str, ...] = ()  # slots dropped by the no-social-habits variant


_SPECS: dict[str, TemplateSpec] = {
    spec.template_id: spec
    for spec in [
        TemplateSpec(
            "recommendation",
            "The output should be a single number between 1 and 10.",
            "7",
        ),
        TemplateSpec(
            "importance",
            "The output should be a single number between 1 and 10.",
            "5",
        ),
        TemplateSpec(
            "wake_hour",
            "The output should be a single number between 0 and 23.",
            "7",
        ),
        TemplateSpec(
            "daily_plan",
            "The output should contain a Plan, a list of entries each with a Time (HH:MM) and an Activity.\n"
            "The output should be in JSON.",
            '{"Plan": [{"Time": "07:00", "Activity": "wake up and stretch"}, '
            '{"Time": "12:00", "Activity": "having lunch"}]}',
        ),
        TemplateSpec(
            "daily_action",
            "The output should contain an Activity.\nThe output should be in JSON.",
            '{"Activity": "having lunch"}',
        ),
        TemplateSpec("decide_post", _JSON_DECIDE_INSTRUCTIONS, _DECIDE_EXAMPLE, habit_slots=("Post Frequency",)),
        TemplateSpec(
            "act_post",
            "Output the response to the prompt above.\nThe output should contain post Content.\nThe output should be in JSON.",
            '{"Content": "the text of the post"}',
        ),
        TemplateSpec("decide_like", _JSON_DECIDE_INSTRUCTIONS, _DECIDE_EXAMPLE, habit_slots=("Engagement",)),
        TemplateSpec("decide_follow", _JSON_DECIDE_INSTRUCTIONS, _DECIDE_EXAMPLE, habit_slots=("Engagement",)),
        TemplateSpec("decide_reply", _JSON_DECIDE_INSTRUCTIONS, _DECIDE_EXAMPLE, habit_slots=("Engagement",)),
        TemplateSpec(
            "act_reply",
            "Output the response to the prompt above.\nThe output should contain reply Content.\nThe output should be in JSON.",
            '{"Content": "the text of the reply"}',
        ),
    ]
}

TEMPLATE_IDS = tuple(sorted(_SPECS))

_core_cache: dict[str, str] = {}


@dataclass(frozen=True)
class PromptParts:
    """The four chain-of-thought prompt parts, concatenated in order."""

    core: str
    step_directive: str = STEP_DIRECTIVE
    instructions: str = ""
    output_example: str = ""

    def render(self) -> str:
        parts = [self.core, self.step_directive, self.instructions]
        if self.output_example:
            parts.append("Example output: " + self.output_example)
        return "\n".join(parts)

    def reprompted(self, directive: str) -> "PromptParts":
        """A follow-up variant used by the malformed-payload re-ask policy."""
        return PromptParts(
            core=self.core,
            step_directive=self.step_directive,
            instructions=self.instructions + "\n" + directive,
            output_example=self.output_example,
        )


def template_core(template_id: str) -> str:
    if template_id not in _SPECS:
        raise TemplateError(f"unknown template {template_id!r}")
    if template_id not in _core_cache:
        text = resources.files(__package__).joinpath(f"templates/{template_id}.txt").read_text("utf-8")
        _core_cache[template_id] = text.rstrip("\n")
    return _core_cache[template_id]


def template_slots(template_id: str) -> list[str]:
    """Slot names in document order, repeats included."""
    return _SLOT_RE.findall(template_core(template_id))


SlotValue = Union[str, Sequence[str]]


def _render_core(template_id: str, core: str, slot_values: Mapping[str, SlotValue]) -> str:
    consumed: dict[str, int] = {}

    def fill(match: re.Match) -> str:
        name = match.group(1)
        if name not in slot_values:
            raise TemplateError(f"template {template_id!r} is missing slot {{{name}}}")
        value = slot_values[name]
        if isinstance(value, str):
            return value
        index = consumed.get(name, 0)
        if index >= len(value):
            raise TemplateError(
                f"template {template_id!r} has more {{{name}}} occurrences than values supplied"
            )
        consumed[name] = index + 1
        return value[index]

    return _SLOT_RE.sub(fill, core)


def build_prompt(
    template_id: str,
    slot_values: Mapping[str, SlotValue],
    *,
    omit_social_habits: bool = False,
) -> PromptParts:
    """Assemble the full prompt for a template.

    With ``omit_social_habits`` the lines carrying habit slots are removed
    from the core before rendering (the degraded no-social-habits variant),
    so no habit text reaches the model and those slots need not be supplied.
    """
    spec = _SPECS.get(template_id)
    if spec is None:
        raise TemplateError(f"unknown template {template_id!r}")
    core = template_core(template_id)
    if omit_social_habits and spec.habit_slots:
        kept = [
            line
            for line in core.split("\n")
            if not any("{" + slot + "}" in line for slot in spec.habit_slots)
        ]
        core = "\n".join(kept)
    rendered = _render_core(template_id, core, slot_values)
    return PromptParts(core=rendered, instructions=spec.instructions, output_example=spec.output_example)
