"""Writing trial records, summary tables and figures."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .harness import AggregateRow, ParamStudyRow, TrialReport, aggregate, trial_from_dict, trial_to_dict

SUMMARY_COLUMNS = ["scenario", "variant", "trials", "%SR", "#LM", "#MP"]
PARAM_COLUMNS = ["sampler", "trials", "%SR", "#Iteration", "#MP", "#LM"]


def summary_csv(rows: list[AggregateRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in rows:
        w.writerow([r.scenario, r.variant, r.trials, f"{r.success_rate:.1f}",
                    f"{r.mean_llm_calls:.2f}", f"{r.mean_mp_calls:.2f}"])
    return buf.getvalue()


def param_csv(rows: list[ParamStudyRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PARAM_COLUMNS)
    for r in rows:
        w.writerow([r.sampler, r.trials, f"{r.success_rate:.1f}", f"{r.mean_iterations:.2f}",
                    f"{r.mean_mp_calls:.2f}", f"{r.mean_llm_calls:.2f}"])
    return buf.getvalue()


def emit_report(reports: list[TrialReport], out_dir, figure: bool = True) -> dict[str, Path]:
    if not reports:
        raise ValueError("no trial reports to write")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"trials": out / "trials.jsonl", "summary": out / "summary.csv"}
    with paths["trials"].open("w") as fh:
        for r in reports:
            fh.write(json.dumps(trial_to_dict(r), sort_keys=True) + "\n")
    rows = aggregate(reports)
    paths["summary"].write_text(summary_csv(rows))
    if figure:
        from .plots import plot_summary

        paths["figure"] = plot_summary(rows, out / "summary.png")
    return paths


def load_trials(path) -> list[TrialReport]:
    p = Path(path)
    if p.is_dir():
        p = p / "trials.jsonl"
    return [trial_from_dict(json.loads(line)) for line in p.read_text().splitlines() if line.strip()]


def emit_param_report(per_trial: list[dict], rows: list[ParamStudyRow], out_dir, figure: bool = True):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"trials": out / "param_trials.jsonl", "summary": out / "param_summary.csv"}
    with paths["trials"].open("w") as fh:
        for rec in per_trial:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    paths["summary"].write_text(param_csv(rows))
    if figure:
        from .plots import plot_param_study

        paths["figure"] = plot_param_study(rows, out / "param_summary.png")
    return paths
