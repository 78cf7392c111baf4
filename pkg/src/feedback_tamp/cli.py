"""Command line entry point: run, gen-scenario, param-study, report.

Settings come from defaults, then an optional YAML ``--config`` file, then
flags (flags win).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from .bench.harness import SAMPLERS, VARIANTS, ConfigError, ExperimentConfig, run_experiment, run_param_study
from .bench.report import emit_param_report, emit_report, load_trials, summary_csv
from .bench.harness import aggregate
from .bench.scenarios import SCENARIOS, make_scenario
from .llm.backends import BACKENDS
from .motion import RrtParams

DEFAULTS = {
    "scenario": ["setting1-easy"],
    "variant": ["llm3-backtrack"],
    "backend": "heuristic",
    "trials": 10,
    "seed": 0,
    "n_max": 20,
    "trace_k": 5,
    "out": "results",
    "replay_file": None,
    "scenario_file": None,
    "url": None,
    "model": None,
    "temperature": None,
    "current_state": False,
    "sampler": ["random", "heuristic"],
    "max_iterations": 1000,
    "step_size": 0.05,
    "goal_bias": 0.1,
    "rrt_iterations": 50_000,
    "no_plot": False,
}


def _csv_list(text: str) -> list[str]:
    return [t for t in text.split(",") if t]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML file with default settings")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--out")
    p.add_argument("--backend", choices=BACKENDS)
    p.add_argument("--replay-file")
    p.add_argument("--url", help="chat-completion endpoint for the http backend")
    p.add_argument("--model")
    p.add_argument("--temperature", type=float)
    p.add_argument("--step-size", type=float)
    p.add_argument("--goal-bias", type=float)
    p.add_argument("--rrt-iterations", type=int)
    p.add_argument("--no-plot", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="feedback-tamp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run ablation trials and write trial records + summary")
    _add_common(run)
    run.add_argument("--scenario", type=_csv_list, help=f"comma list from: {', '.join(SCENARIOS)}")
    run.add_argument("--scenario-file", help="load the scenario from a saved file instead")
    run.add_argument("--variant", type=_csv_list, help=f"comma list from: {', '.join(VARIANTS)}")
    run.add_argument("--n-max", type=int)
    run.add_argument("--trace-k", type=int)
    run.add_argument("--current-state", action="store_true", default=None,
                     help="prompt with the current state instead of the initial one")

    gen = sub.add_parser("gen-scenario", help="write a generated scenario file")
    gen.add_argument("--scenario", required=True, choices=list(SCENARIOS))
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", help="output path (stdout if omitted)")

    ps = sub.add_parser("param-study", help="fixed 8-step sequence, compare parameter samplers")
    _add_common(ps)
    ps.add_argument("--sampler", type=_csv_list, help=f"comma list from: {', '.join(SAMPLERS)}")
    ps.add_argument("--max-iterations", type=int)

    rep = sub.add_parser("report", help="rebuild summary.csv and figure from trials.jsonl")
    rep.add_argument("--in", dest="inp", required=True, help="trials.jsonl or a directory holding it")
    rep.add_argument("--out", help="output directory (defaults to the input directory)")
    rep.add_argument("--no-plot", action="store_true")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        data = yaml.safe_load(Path(args.config).read_text()) or {}
        for key, value in data.items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            if key in ("scenario", "variant", "sampler") and isinstance(value, str):
                value = _csv_list(value)
            settings[key] = value
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            settings[key] = value
    return settings


def _backend_options(st: dict) -> dict:
    if st["backend"] == "replay":
        return {"path": st["replay_file"]} if st["replay_file"] else {}
    if st["backend"] == "http":
        return {k: st[k] for k in ("url", "model", "temperature") if st[k] is not None}
    return {}


def _rrt(st: dict) -> RrtParams:
    return RrtParams(st["step_size"], st["goal_bias"], st["rrt_iterations"])


def cmd_run(st: dict) -> int:
    cfg = ExperimentConfig(
        scenarios=list(st["scenario"]), variants=list(st["variant"]), backend=st["backend"],
        backend_options=_backend_options(st), trials=st["trials"], seed=st["seed"], n_max=st["n_max"],
        k=st["trace_k"], rrt=_rrt(st), send_current_state=bool(st["current_state"]),
        scenario_file=st["scenario_file"], out=st["out"],
    )
    reports, rows = run_experiment(cfg)
    paths = emit_report(reports, st["out"], figure=not st["no_plot"])
    sys.stdout.write(summary_csv(rows))
    for name, p in paths.items():
        print(f"wrote {name}: {p}", file=sys.stderr)
    return 0


def cmd_gen(args) -> int:
    text = make_scenario(args.scenario, args.seed).to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_param_study(st: dict) -> int:
    per_trial, rows = run_param_study(
        st["sampler"], st["trials"], st["seed"], st["max_iterations"],
        st["backend"] if st["backend"] in ("http", "replay") else "http", _backend_options(st), _rrt(st),
    )
    paths = emit_param_report(per_trial, rows, st["out"], figure=not st["no_plot"])
    sys.stdout.write(paths["summary"].read_text())
    return 0


def cmd_report(args) -> int:
    reports = load_trials(args.inp)
    inp = Path(args.inp)
    out = Path(args.out) if args.out else (inp if inp.is_dir() else inp.parent)
    emit_report(reports, out, figure=not args.no_plot)
    sys.stdout.write(summary_csv(aggregate(reports)))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen-scenario":
            return cmd_gen(args)
        if args.command == "report":
            return cmd_report(args)
        st = resolve(args)
        if args.command == "run":
            return cmd_run(st)
        return cmd_param_study(st)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
