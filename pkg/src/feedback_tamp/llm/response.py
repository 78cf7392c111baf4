"""Reading the planner's JSON answer out of free-form model output."""
from __future__ import annotations

import json
from dataclasses import dataclass

from ..actions import ActionError, GroundAction, format_action, parse_action


class MalformedResponse(ValueError):
    pass


@dataclass(frozen=True)
class LlmResponse:
    raw: str
    reasoning: str
    plan: tuple[GroundAction, ...]


def _first_json_object(raw: str) -> dict:
    decoder = json.JSONDecoder()
    pos = raw.find("{")
    while pos != -1:
        try:
            obj, _ = decoder.raw_decode(raw, pos)
        except json.JSONDecodeError:
            pass
        else:
            if isinstance(obj, dict):
                return obj
        pos = raw.find("{", pos + 1)
    raise MalformedResponse("no JSON object found in the response")


def parse_response(raw: str) -> LlmResponse:
    obj = _first_json_object(raw)
    missing = [k for k in ("Reasoning", "Full Plan") if k not in obj]
    if missing:
        raise MalformedResponse(f"missing key(s) {', '.join(missing)}")
    reasoning, plan = obj["Reasoning"], obj["Full Plan"]
    if not isinstance(reasoning, str):
        raise MalformedResponse('"Reasoning" must be a string')
    if not isinstance(plan, list) or not all(isinstance(a, str) for a in plan):
        raise MalformedResponse('"Full Plan" must be a list of action strings')
    if not plan:
        raise MalformedResponse('"Full Plan" is empty')
    actions = []
    for i, text in enumerate(plan):
        try:
            actions.append(parse_action(text))
        except ActionError as exc:
            raise MalformedResponse(f"action {i + 1} ({text!r}) rejected: {exc}") from exc
    return LlmResponse(raw, reasoning, tuple(actions))


def format_response(reasoning: str, plan) -> str:
    return json.dumps({"Reasoning": reasoning, "Full Plan": [format_action(a) for a in plan]})
