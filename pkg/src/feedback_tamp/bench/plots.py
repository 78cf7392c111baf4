"""Bar charts for the ablation summary and the sampler comparison."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "savefig.dpi": 150,
}


def _grouped(ax, groups, series, values, ylabel):
    width = 0.8 / max(1, len(series))
    x = np.arange(len(groups))
    for i, name in enumerate(series):
        ax.bar(x + (i - (len(series) - 1) / 2) * width, values[i], width, label=name)
    ax.set_xticks(x)
    ax.set_xticklabels(groups, rotation=20, ha="right")
    ax.set_ylabel(ylabel)


def plot_summary(rows, path) -> Path:
    scenarios = list(dict.fromkeys(r.scenario for r in rows))
    variants = list(dict.fromkeys(r.variant for r in rows))
    table = {(r.scenario, r.variant): r for r in rows}

    def grid(attr):
        return [[getattr(table[s, v], attr) if (s, v) in table else 0.0 for s in scenarios] for v in variants]

    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 3, figsize=(11, 3.4), constrained_layout=True)
        _grouped(axes[0], scenarios, variants, grid("success_rate"), "%SR")
        axes[0].set_ylim(0, 105)
        _grouped(axes[1], scenarios, variants, grid("mean_llm_calls"), "#LM (mean)")
        _grouped(axes[2], scenarios, variants, grid("mean_mp_calls"), "#MP (mean)")
        handles, labels = axes[0].get_legend_handles_labels()
        fig.legend(handles, labels, loc="outside upper center", ncol=len(variants))
        path = Path(path)
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_param_study(rows, path) -> Path:
    names = [r.sampler for r in rows]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(7, 3), constrained_layout=True)
        axes[0].bar(names, [r.mean_iterations for r in rows], color="tab:blue")
        axes[0].set_ylabel("iterations (mean)")
        axes[1].bar(names, [r.mean_mp_calls for r in rows], color="tab:orange")
        axes[1].set_ylabel("#MP (mean)")
        for ax in axes:
            ax.set_yscale("log")
        path = Path(path)
        fig.savefig(path)
        plt.close(fig)
    return path
