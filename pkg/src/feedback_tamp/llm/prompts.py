"""Prompt construction for the task planner.

The prompt has five blocks in a fixed order: system message, task
description, initial state, feedback trace and output format. Only the trace
changes between iterations of one problem. No worked planning examples are
included.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from ..actions import SCHEMAS


class Strategy(enum.Enum):
    BACKTRACK = "backtrack"
    FROM_SCRATCH = "scratch"


@dataclass(frozen=True)
class PromptBundle:
    system_message: str
    user_message: str

    def __post_init__(self):
        if not self.system_message or not self.user_message:
            raise ValueError("prompt messages must be nonempty")

    def messages(self) -> list[dict[str, str]]:
        return [
            {"role": "system", "content": self.system_message},
            {"role": "user", "content": self.user_message},
        ]

    def with_suffix(self, extra: str) -> PromptBundle:
        return PromptBundle(self.system_message, f"{self.user_message}\n\n{extra}")


SYSTEM_BASE = (
    "You are an AI robot that generates a plan of actions to reach the goal. "
    # not verbatim from here: fills an elided span of the reference template
    "You will be given a task description, the initial state of the environment, "
    "and a trace of motion planning feedback from your previous plans."
)
SYSTEM_VARIANT = {
    Strategy.BACKTRACK: (
        "You are expected to correct the plan incrementally (on top of the last plan) to avoid motion failure. "
        "This may involve sample new parameters for the failed action or reverse one or more succeeded "
        "actions for backtracking."
    ),
    Strategy.FROM_SCRATCH: "You are expected to generate a plan from scratch.",
}

# question marks closing (ii) and (iii) of the backtrack list are reconstructed
QUESTIONS = {
    Strategy.BACKTRACK: (
        "(i) what is the cause of the failure of the last plan? "
        "(ii) can altering action parameters for the failed action solve the problem? "
        "(iii) do we need to reverse one or more succeeded actions executed before the failed action?"
    ),
    Strategy.FROM_SCRATCH: (
        "(i) what is the cause of the failure of the last plan? "
        "(ii) what is your strategy to generate a new plan from scratch to accomplish the task goal?"
    ),
}

OUTPUT_SCHEMA = (
    "{\n"
    '    "Reasoning": "My reasoning for the failure of the last plan is ...",\n'
    "    \"Full Plan\": [\"pick(['red_box'], {})\", "
    "\"place(['red_box'], {'x': 0.51, 'y': 0.02, 'theta': 0.00})\", ...]\n"
    "}"
)

EMPTY_TRACE = "(none yet)"


def _fmt_interval(lo: float, hi: float) -> str:
    return f"[{lo:.2f}, {hi:.2f}]"


def describe_actions() -> str:
    lines = []
    place = SCHEMAS["place"]
    lines.append("- pick([obj], {}): pick up obj, with no parameters.")
    ranges = ", ".join(f'"{n}": {_fmt_interval(lo, hi)}' for n, lo, hi in place.params)
    bounds = ", ".join(f"{n} ranges ({lo:.2f}, {hi:.2f})" for n, lo, hi in place.params)
    lines.append(
        f"- place([obj], {{{ranges}}}): place obj at location (x, y) with the planar rotation theta, "
        f"where {bounds}."
    )
    return "\n".join(lines)


def task_description(targets) -> str:
    names = ", ".join(targets)
    return (
        "A robot arm is tasked to pack boxes into a basket on a table. The robot sits at (0, 0), "
        "and faces the positive x-axis, while the positive z-axis points up. "
        # not verbatim: the goal sentence is reconstructed
        f"The goal is to place every one of these objects fully inside the basket without overlap: {names}.\n"
        "The robot is equipped with primitive actions, each taking a list of objects and continuous "
        "parameters as input:\n" + describe_actions()
    )


def render_trace(trace) -> str:
    records = list(getattr(trace, "records", trace))
    if not records:
        return EMPTY_TRACE
    blocks = []
    for i, rec in enumerate(records, 1):
        lines = [f"Attempt {i}:"]
        lines += [f"{action} -> {feedback}" if action else feedback for action, feedback in rec.action_feedback]
        if rec.task_feedback:
            lines.append(rec.task_feedback)
        blocks.append("\n".join(lines))
    return "\n".join(blocks)


def build_prompt(strategy: Strategy, scenario, s0_text: str, trace=()) -> PromptBundle:
    k = getattr(trace, "k", None)
    if k is not None and len(trace.records) > k:
        raise ValueError("trace longer than its bound")
    system = f"{SYSTEM_BASE} {SYSTEM_VARIANT[strategy]}"
    user = "\n\n".join([
        "Task description:\n" + task_description(scenario.goal.target_objects),
        "Initial state:\n" + s0_text,
        "Motion planning feedback trace:\n" + render_trace(trace),
        "Output format:\nPlease generate output step-by-step, which includes your reasoning for the failure "
        "of the last plan as well as the generated plan. Answer the questions: " + QUESTIONS[strategy] +
        "\nPlease organize the output following the JSON format below:\n" + OUTPUT_SCHEMA,
    ])
    return PromptBundle(system, user)


def corrective_prompt(prompt: PromptBundle, diagnostic: str) -> PromptBundle:
    return prompt.with_suffix(
        f"Your previous output was not valid JSON: {diagnostic}. Re-emit only the JSON object."
    )
