"""The feedback-driven planning loop and the fixed-sequence parameter search."""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .actions import PLACE, GroundAction, applicable, format_action, make_action
from .llm.backends import BackendError, BudgetExhausted, QueryBudget, TransportError, query
from .llm.prompts import PromptBundle, Strategy, build_prompt, corrective_prompt, describe_actions
from .llm.response import MalformedResponse, parse_response
from .llm.sampling import grid_packing, sample_params_random
from .metrics import Counters
from .motion import RrtParams, Trajectory, plan_motion
from .world import WorldState, goal_satisfied, textualize_state, transition

log = logging.getLogger(__name__)

FAILED_LINE = "Action failed."
SUCCEEDED_LINE = "Action succeeded."


class IterationCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class IterationRecord:
    action_feedback: tuple[tuple[str, str], ...]
    task_feedback: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "action_feedback", tuple(tuple(p) for p in self.action_feedback))
        if not self.action_feedback and not self.task_feedback:
            raise ValueError("empty iteration record")

    def lines(self) -> list[str]:
        out = [f"{a} -> {f}" if a else f for a, f in self.action_feedback]
        if self.task_feedback:
            out.append(self.task_feedback)
        return out


@dataclass(frozen=True)
class FeedbackTrace:
    k: int
    records: tuple[IterationRecord, ...] = ()

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("trace bound k must be >= 1")
        if len(self.records) > self.k:
            raise ValueError("trace longer than k")

    def __len__(self):
        return len(self.records)


def trace_push(trace: FeedbackTrace, record: IterationRecord) -> FeedbackTrace:
    records = (*trace.records, record)[-trace.k:]
    return replace(trace, records=records)


@dataclass
class PlannerConfig:
    n_max: int = 20
    k: int = 5
    rrt: RrtParams = field(default_factory=RrtParams)
    motion_feedback: bool = True
    use_trace: bool = True
    send_current_state: bool = False
    seed: int = 0
    motion_fn: Callable | None = None  # stand-in for plan_motion, e.g. to instrument calls


@dataclass
class PlanOutcome:
    success: bool
    plan: list[tuple[GroundAction, Trajectory]]
    metrics: dict[str, int]
    final_state: WorldState
    error: str | None = None

    @property
    def llm_calls(self) -> int:
        return self.metrics["llm_calls"]

    @property
    def mp_calls(self) -> int:
        return self.metrics["mp_calls"]


class RolloutContext:
    """Counters plus a deterministic stream of per-query RRT seeds."""

    def __init__(self, rrt: RrtParams = RrtParams(), seed: int = 0, counters: Counters | None = None,
                 motion_feedback: bool = True, motion_fn=plan_motion):
        self.rrt = rrt
        self.counters = counters if counters is not None else Counters()
        self.motion_feedback = motion_feedback
        self.motion_fn = motion_fn
        self._seeds = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))

    def next_params(self) -> RrtParams:
        return replace(self.rrt, rng_seed=int(self._seeds.integers(2**31)))


@dataclass
class RolloutResult:
    state: WorldState
    prefix: list[tuple[GroundAction, Trajectory]]
    feedback: list[tuple[str, str]]
    halted: bool


def rollout(s: WorldState, plan: Sequence[GroundAction], ctx: RolloutContext) -> RolloutResult:
    prefix, feedback = [], []
    for a in plan:
        text = format_action(a)
        ok, reason = applicable(s, a)
        if not ok:
            feedback.append((text, f"Action {text} is not applicable: {reason}."))
            return RolloutResult(s, prefix, feedback, True)
        tau, fb = ctx.motion_fn(s, a, ctx.next_params(), ctx.counters)
        if ctx.motion_feedback:
            line = fb.text
        else:
            line = SUCCEEDED_LINE if tau is not None else FAILED_LINE
        feedback.append((text, line))
        if tau is None:
            return RolloutResult(s, prefix, feedback, True)
        s = transition(s, a, tau)
        prefix.append((a, tau))
    return RolloutResult(s, prefix, feedback, False)


def _digest(prompt: PromptBundle) -> str:
    return hashlib.sha256((prompt.system_message + "\0" + prompt.user_message).encode()).hexdigest()[:16]


def llm3_plan(scenario, strategy: Strategy, backend, cfg: PlannerConfig = PlannerConfig(),
              logger: Callable[[dict], None] | None = None) -> PlanOutcome:
    """Query, roll out, check the goal, feed failures back; at most ``cfg.n_max`` queries.

    Backtrack keeps the state and the executed plan between iterations;
    from-scratch restarts from the initial state every time.
    """
    if cfg.n_max < 1 or cfg.k < 1:
        raise ValueError("n_max and k must be >= 1")
    s0 = scenario.initial_state()
    s0_text = textualize_state(s0)
    counters = Counters()
    budget = QueryBudget(cfg.n_max)
    ctx = RolloutContext(cfg.rrt, cfg.seed, counters, cfg.motion_feedback, cfg.motion_fn or plan_motion)
    trace = FeedbackTrace(cfg.k)
    s, plan = s0, []
    success, iteration, error = False, 0, None

    while not success and iteration < cfg.n_max:
        if strategy is Strategy.FROM_SCRATCH:
            s, plan = s0, []
        state_text = textualize_state(s) if cfg.send_current_state else s0_text
        prompt = build_prompt(strategy, scenario, state_text, trace if cfg.use_trace else FeedbackTrace(cfg.k))
        responses = []
        try:
            raw = query(backend, prompt, budget, counters)
            iteration += 1
            responses.append(raw)
            try:
                response = parse_response(raw)
            except MalformedResponse as exc:
                log.info("unparsable response, asking again: %s", exc)
                response = None
                diag = str(exc)
                if budget.remaining > 0:
                    raw = query(backend, corrective_prompt(prompt, diag), budget, counters)
                    responses.append(raw)
                    try:
                        response = parse_response(raw)
                    except MalformedResponse as exc2:
                        diag = str(exc2)
        except BudgetExhausted:
            break
        except (TransportError, BackendError) as exc:
            error = f"{type(exc).__name__}: {exc}"
            log.error("trial aborted: %s", error)
            break

        if response is None:
            record = IterationRecord((("", f"Planner response unparsable: {diag}"),))
            trace = trace_push(trace, record)
            _emit(logger, iteration, prompt, responses, record.lines(), counters, trace)
            continue

        result = rollout(s, response.plan, ctx)
        s = result.state
        plan.extend(result.prefix)
        success, task_fb = goal_satisfied(s, scenario.goal)
        lines = [f"{a} -> {f}" for a, f in result.feedback]
        if not success:
            record = IterationRecord(result.feedback, task_fb.text)
            trace = trace_push(trace, record)
            lines = record.lines()
        _emit(logger, iteration, prompt, responses, lines, counters, trace, success)

    return PlanOutcome(success, plan, {**counters.as_dict(), "iterations": iteration}, s, error)


def _emit(logger, iteration, prompt, responses, lines, counters, trace, success=False):
    if logger is None:
        return
    logger({
        "iteration": iteration,
        "prompt_sha256": _digest(prompt),
        "responses": responses,
        "feedback": lines,
        "success": success,
        "trace_len": len(trace),
        **counters.as_dict(),
    })


# -- fixed symbolic sequence, sampled place parameters ---------------------------------------


@dataclass
class ParamSearchConfig:
    max_iterations: int = 1000
    rrt: RrtParams = field(default_factory=RrtParams)
    seed: int = 0


@dataclass
class ParamSearchOutcome:
    success: bool
    iterations: int
    mp_calls: int
    llm_calls: int = 0


class RandomSampler:
    name = "random"

    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, 0xA11]))

    def propose(self, s0: WorldState, order, feedback):
        return {n: sample_params_random(PLACE, s0.basket.interior, self.rng) for n in order}


class HeuristicSampler:
    name = "heuristic"

    def propose(self, s0: WorldState, order, feedback):
        placement = grid_packing(s0, list(order))
        if placement is None:
            return None
        return {n: {"x": p.x, "y": p.y, "theta": p.theta} for n, p in placement.items()}


class LlmSampler:
    """Asks a backend to fill in the place parameters of a fixed sequence."""

    def __init__(self, backend, use_feedback: bool = True, counters: Counters | None = None):
        self.backend = backend
        self.use_feedback = use_feedback
        self.counters = counters if counters is not None else Counters()
        self.budget = QueryBudget(10**9)
        self.name = "llm-feedback" if use_feedback else "llm"

    def prompt(self, s0: WorldState, order, feedback) -> PromptBundle:
        skeleton = []
        for n in order:
            skeleton += [f"pick(['{n}'], {{}})", f"place(['{n}'], {{'x': ?, 'y': ?, 'theta': ?}})"]
        fb = "\n".join(f"{a} -> {f}" for a, f in feedback) if (self.use_feedback and feedback) else "(none)"
        user = "\n\n".join([
            "Task description:\nA robot arm sitting at (0, 0) packs boxes into a basket on a table. "
            "The action sequence below is fixed; choose the place parameters so that every action is "
            "collision-free and reachable and all boxes end fully inside the basket.\n" + describe_actions(),
            "Initial state:\n" + textualize_state(s0),
            "Action sequence:\n" + "\n".join(skeleton),
            "Motion planning feedback from the last attempt:\n" + fb,
            'Output format: a JSON object {"Reasoning": "...", "Full Plan": [...]} whose "Full Plan" is the '
            "action sequence above with every ? replaced by a number.",
        ])
        return PromptBundle("You are an AI robot that selects continuous action parameters.", user)

    def propose(self, s0: WorldState, order, feedback):
        raw = query(self.backend, self.prompt(s0, order, feedback), self.budget, self.counters)
        try:
            response = parse_response(raw)
        except MalformedResponse:
            return None
        places = [a for a in response.plan if a.name == "place"]
        if [a.obj for a in places] != list(order):
            return None
        return {a.obj: dict(a.params) for a in places}


def fixed_sequence_param_search(scenario, sampler, cfg: ParamSearchConfig = ParamSearchConfig(),
                                raise_on_cap: bool = False) -> ParamSearchOutcome:
    """Pick/place every target in goal order; resample all place parameters each iteration."""
    s0 = scenario.initial_state()
    order = list(scenario.goal.target_objects)
    ctx = RolloutContext(cfg.rrt, cfg.seed)
    feedback: list[tuple[str, str]] = []
    for iteration in range(1, cfg.max_iterations + 1):
        params = sampler.propose(s0, order, feedback)
        if params is None:
            feedback = [("", "Parameters could not be read.")]
            continue
        plan = []
        for n in order:
            plan += [make_action("pick", [n]), make_action("place", [n], params[n])]
        result = rollout(s0, plan, ctx)
        feedback = result.feedback
        if not result.halted and goal_satisfied(result.state, scenario.goal)[0]:
            return ParamSearchOutcome(True, iteration, ctx.counters.mp_calls, _llm_calls(sampler))
    if raise_on_cap:
        raise IterationCapExceeded(f"no feasible parameters within {cfg.max_iterations} iterations")
    return ParamSearchOutcome(False, cfg.max_iterations, ctx.counters.mp_calls, _llm_calls(sampler))


def _llm_calls(sampler) -> int:
    counters = getattr(sampler, "counters", None)
    return counters.llm_calls if counters is not None else 0


def make_sampler(kind: str, seed: int = 0, backend=None):
    if kind == "random":
        return RandomSampler(seed)
    if kind == "heuristic":
        return HeuristicSampler()
    if kind in ("llm", "llm-feedback"):
        if backend is None:
            raise ValueError(f"sampler {kind!r} needs a backend")
        return LlmSampler(backend, use_feedback=kind == "llm-feedback")
    raise ValueError(f"unknown sampler {kind!r}")
