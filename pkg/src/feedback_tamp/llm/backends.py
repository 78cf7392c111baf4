"""Planner backends and the counted query entry point.

A backend is anything with ``complete(prompt) -> str``. ``query`` is the only
place that charges the LLM budget and the ``llm_calls`` counter, once per
delivered completion.
"""
from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path

import httpx
import numpy as np

from ..actions import PLACE, make_action
from ..metrics import Counters
from .prompts import PromptBundle
from .response import format_response
from .sampling import grid_packing, sample_params_random

log = logging.getLogger(__name__)

API_KEY_ENV = "LLM3_API_KEY"
DEFAULT_URL = "https://api.openai.com/v1/chat/completions"
DEFAULT_MODEL = "gpt-4-turbo"
RETRY_STATUS = {429, 500, 502, 503, 504}


class BudgetExhausted(RuntimeError):
    pass


class TransportError(RuntimeError):
    pass


class BackendError(RuntimeError):
    pass


@dataclass
class QueryBudget:
    limit: int
    used: int = 0

    @property
    def remaining(self) -> int:
        return self.limit - self.used


def query(backend, prompt: PromptBundle, budget: QueryBudget, counters: Counters | None = None) -> str:
    if budget.remaining <= 0:
        raise BudgetExhausted(f"LLM budget of {budget.limit} queries used up")
    text = backend.complete(prompt)
    budget.used += 1
    if counters is not None:
        counters.llm_calls += 1
    return text


class HttpChatBackend:
    """Chat-completion client (OpenAI-compatible wire format)."""

    def __init__(self, url: str = DEFAULT_URL, model: str = DEFAULT_MODEL, temperature: float = 1.0,
                 api_key: str | None = None, timeout: float = 120.0, max_attempts: int = 3,
                 backoff: float = 1.0, transport: httpx.BaseTransport | None = None, sleep=time.sleep):
        self.url = url
        self.model = model
        self.temperature = temperature
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.sleep = sleep
        self.client = httpx.Client(timeout=timeout, transport=transport)

    def request_body(self, prompt: PromptBundle) -> dict:
        return {"model": self.model, "messages": prompt.messages(), "temperature": self.temperature}

    def complete(self, prompt: PromptBundle) -> str:
        if not self.api_key:
            raise BackendError(f"no API key; set {API_KEY_ENV}")
        headers = {"Authorization": f"Bearer {self.api_key}"}
        body = self.request_body(prompt)
        last = None
        for attempt in range(self.max_attempts):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self.client.post(self.url, json=body, headers=headers)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
                log.warning("chat request failed (attempt %d): %s", attempt + 1, last)
                continue
            if resp.status_code in RETRY_STATUS:
                last = f"HTTP {resp.status_code}"
                log.warning("chat request got %s (attempt %d)", last, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"unexpected response body: {exc}") from exc
        raise TransportError(f"gave up after {self.max_attempts} attempts ({last})")

    def close(self):
        self.client.close()


class ReplayBackend:
    """Returns canned completions in order; errors once they run out."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = 0

    @classmethod
    def from_file(cls, path) -> ReplayBackend:
        lines = Path(path).read_text().splitlines()
        out = []
        for n, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                json.loads(line)
            except json.JSONDecodeError as exc:
                raise BackendError(f"{path}:{n}: not a JSON document ({exc})") from exc
            out.append(line)
        return cls(out)

    def complete(self, prompt: PromptBundle) -> str:
        if self.calls >= len(self.responses):
            raise BackendError(f"replay script exhausted after {len(self.responses)} responses")
        self.calls += 1
        return self.responses[self.calls - 1]


class HeuristicBackend:
    """Deterministic planner: grid-pack every target, emit pick/place pairs.

    Targets already inside the basket are repacked too, so the same plan is
    valid from the initial state on every call.
    """

    def __init__(self, scenario):
        self.scenario = scenario
        self.calls = 0

    def plan(self):
        s0 = self.scenario.initial_state()
        targets = list(self.scenario.goal.target_objects)
        placement = grid_packing(s0, targets)
        if placement is None:
            raise BackendError("heuristic packer found no placement for all targets")
        order = sorted(targets, key=lambda n: (-s0.objects[n].shape.footprint_area, n))
        actions = []
        for name in order:
            p = placement[name]
            actions.append(make_action("pick", [name]))
            actions.append(make_action("place", [name], {"x": p.x, "y": p.y, "theta": p.theta}))
        return actions

    def complete(self, prompt: PromptBundle) -> str:
        self.calls += 1
        return format_response("Greedy grid packing of all targets, largest first.", self.plan())


class RandomBackend:
    """Uniform placements inside the basket for every target."""

    def __init__(self, scenario, seed: int = 0):
        self.scenario = scenario
        self.rng = np.random.default_rng(seed)

    def complete(self, prompt: PromptBundle) -> str:
        s0 = self.scenario.initial_state()
        actions = []
        for name in self.scenario.goal.target_objects:
            params = sample_params_random(PLACE, s0.basket.interior, self.rng)
            actions.append(make_action("pick", [name]))
            actions.append(make_action("place", [name], params))
        return format_response("Random placements.", actions)


BACKENDS = ("http", "replay", "heuristic", "random")


def make_backend(kind: str, scenario=None, seed: int = 0, **options):
    if kind == "http":
        return HttpChatBackend(**options)
    if kind == "replay":
        return ReplayBackend.from_file(options["path"])
    if kind == "heuristic":
        return HeuristicBackend(scenario)
    if kind == "random":
        return RandomBackend(scenario, seed)
    raise ValueError(f"unknown backend {kind!r}; choose from {', '.join(BACKENDS)}")
