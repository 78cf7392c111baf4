"""Ablation runs: trials over scenarios x variants, aggregated like the results table."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..llm.backends import make_backend
from ..llm.prompts import Strategy
from ..motion import RrtParams
from ..planner import (
    ParamSearchConfig,
    PlannerConfig,
    fixed_sequence_param_search,
    llm3_plan,
    make_sampler,
)
from .scenarios import SCENARIOS, ScenarioSpec, make_scenario

log = logging.getLogger(__name__)

# variant -> (strategy, motion feedback text, feedback trace in prompt)
VARIANTS = {
    "llm3-backtrack": (Strategy.BACKTRACK, True, True),
    "backtrack": (Strategy.BACKTRACK, False, True),
    "llm3-scratch": (Strategy.FROM_SCRATCH, True, True),
    "scratch": (Strategy.FROM_SCRATCH, False, False),
}
SAMPLERS = ("random", "heuristic", "llm", "llm-feedback")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    scenarios: list[str] = field(default_factory=lambda: ["setting1-easy"])
    variants: list[str] = field(default_factory=lambda: ["llm3-backtrack"])
    backend: str = "heuristic"
    backend_options: dict = field(default_factory=dict)
    trials: int = 10
    seed: int = 0
    n_max: int = 20
    k: int = 5
    rrt: RrtParams = field(default_factory=RrtParams)
    send_current_state: bool = False
    scenario_file: str | None = None
    out: str | None = None

    def check(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.n_max < 1 or self.k < 1:
            raise ConfigError("n_max and k must be >= 1")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}; choose from {', '.join(VARIANTS)}")
        if self.scenario_file is None:
            for s in self.scenarios:
                if s not in SCENARIOS:
                    raise ConfigError(f"unknown scenario {s!r}; choose from {', '.join(SCENARIOS)}")
        if self.backend == "replay" and "path" not in self.backend_options:
            raise ConfigError("replay backend needs a replay file")


@dataclass
class TrialReport:
    scenario: str
    variant: str
    seed: int
    success: bool
    llm_calls: int
    mp_calls: int
    iterations: int
    wall_time: float
    error: str | None = None


@dataclass(frozen=True)
class AggregateRow:
    scenario: str
    variant: str
    trials: int
    success_rate: float
    mean_llm_calls: float
    mean_mp_calls: float


def trial_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0] & 0x7FFFFFFF)


def _scenario_for(cfg: ExperimentConfig, name: str, seed: int) -> ScenarioSpec:
    if cfg.scenario_file:
        return ScenarioSpec.load(cfg.scenario_file)
    return make_scenario(name, seed)


def run_trial(cfg: ExperimentConfig, scenario_name: str, variant: str, index: int,
              iteration_log=None) -> TrialReport:
    seed = trial_seed(cfg.seed, index)
    t0 = time.perf_counter()
    strategy, feedback, use_trace = VARIANTS[variant]
    try:
        scenario = _scenario_for(cfg, scenario_name, seed)
        backend = make_backend(cfg.backend, scenario, seed, **cfg.backend_options)
        pcfg = PlannerConfig(cfg.n_max, cfg.k, cfg.rrt, feedback, use_trace, cfg.send_current_state, seed)

        def logger(rec):
            if iteration_log is not None:
                iteration_log({"scenario": scenario_name, "variant": variant, "trial": index, "seed": seed, **rec})

        outcome = llm3_plan(scenario, strategy, backend, pcfg, logger)
        m = outcome.metrics
        return TrialReport(scenario_name, variant, seed, outcome.success, m["llm_calls"], m["mp_calls"],
                           m["iterations"], time.perf_counter() - t0, outcome.error)
    except Exception as exc:  # one broken trial must not sink the batch
        log.exception("trial %s/%s/%d failed", scenario_name, variant, index)
        return TrialReport(scenario_name, variant, seed, False, 0, 0, 0, time.perf_counter() - t0,
                           f"{type(exc).__name__}: {exc}")


def aggregate(reports: list[TrialReport]) -> list[AggregateRow]:
    groups: dict[tuple[str, str], list[TrialReport]] = {}
    for r in reports:
        groups.setdefault((r.scenario, r.variant), []).append(r)
    rows = []
    for (scenario, variant), rs in groups.items():
        n = len(rs)
        rows.append(AggregateRow(
            scenario, variant, n,
            100.0 * sum(r.success for r in rs) / n,
            sum(r.llm_calls for r in rs) / n,
            sum(r.mp_calls for r in rs) / n,
        ))
    return sorted(rows, key=_row_key)


def _row_key(row: AggregateRow):
    s_order = list(SCENARIOS)
    v_order = list(VARIANTS)
    return (s_order.index(row.scenario) if row.scenario in s_order else len(s_order), row.scenario,
            v_order.index(row.variant) if row.variant in v_order else len(v_order), row.variant)


def run_experiment(cfg: ExperimentConfig) -> tuple[list[TrialReport], list[AggregateRow]]:
    cfg.check()
    out = Path(cfg.out) if cfg.out else None
    sink = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        sink = (out / "iterations.jsonl").open("w")
    reports = []
    try:
        def write(rec):
            if sink is not None:
                sink.write(json.dumps(rec, sort_keys=True) + "\n")

        names = [Path(cfg.scenario_file).stem] if cfg.scenario_file else cfg.scenarios
        for name in names:
            for variant in cfg.variants:
                for i in range(cfg.trials):
                    rep = run_trial(cfg, name, variant, i, write)
                    log.info("%s %s trial %d: success=%s #LM=%d #MP=%d", name, variant, i,
                             rep.success, rep.llm_calls, rep.mp_calls)
                    reports.append(rep)
    finally:
        if sink is not None:
            sink.close()
    return reports, aggregate(reports)


def trial_to_dict(r: TrialReport) -> dict:
    return asdict(r)


def trial_from_dict(d: dict) -> TrialReport:
    return TrialReport(**d)


# -- fixed-sequence parameter study -----------------------------------------------------------


@dataclass
class ParamStudyRow:
    sampler: str
    trials: int
    success_rate: float
    mean_iterations: float
    mean_mp_calls: float
    mean_llm_calls: float


def run_param_study(samplers, trials: int = 50, seed: int = 0, max_iterations: int = 1000,
                    backend: str | None = None, backend_options: dict | None = None,
                    rrt: RrtParams = RrtParams()):
    per_trial = []
    rows = []
    for kind in samplers:
        if kind not in SAMPLERS:
            raise ConfigError(f"unknown sampler {kind!r}; choose from {', '.join(SAMPLERS)}")
        outs = []
        for i in range(trials):
            s = trial_seed(seed, i)
            scenario = make_scenario("setting1-medium", s)
            be = None
            if kind.startswith("llm"):
                be = make_backend(backend or "http", scenario, s, **(backend_options or {}))
            sampler = make_sampler(kind, s, be)
            o = fixed_sequence_param_search(scenario, sampler, ParamSearchConfig(max_iterations, rrt, s))
            outs.append(o)
            per_trial.append({"sampler": kind, "trial": i, "seed": s, **asdict(o)})
        n = len(outs)
        rows.append(ParamStudyRow(
            kind, n, 100.0 * sum(o.success for o in outs) / n,
            sum(o.iterations for o in outs) / n,
            sum(o.mp_calls for o in outs) / n,
            sum(o.llm_calls for o in outs) / n,
        ))
    return per_trial, rows
