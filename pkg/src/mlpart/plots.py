"""Figure rendering for experiment reports.

Companion to the CSV output: average-cut bars per instance and
ratio-of-averages curves across k, written as PNG files next to the report.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .bench import ExperimentReport

__all__ = ["render_report_figures"]

_FIGSIZE = (6.4, 4.0)


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def render_report_figures(report: ExperimentReport, out_dir: str) -> list[str]:
    """Write one average-cut figure per (graph, k) and one ratio figure per
    preset pair; returns the created paths."""
    os.makedirs(out_dir, exist_ok=True)
    created: list[str] = []
    presets = report.presets()

    for graph, k in report.combos():
        values, labels = [], []
        for preset in presets:
            cuts = report.ok_cuts(graph, preset, k)
            if cuts:
                labels.append(preset)
                values.append(sum(cuts) / len(cuts))
        if not values:
            continue
        fig, ax = plt.subplots(figsize=_FIGSIZE)
        ax.bar(range(len(values)), values, color="#4878a8")
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=20, ha="right")
        ax.set_ylabel("average cut")
        ax.set_title(f"{graph}, k={k} (avg over {len(report.seeds)} seeds)")
        ax.grid(axis="y", alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, f"avg_cut_{_safe(graph)}_k{k}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        created.append(path)

    ratio_rows = report.ratio_rows()
    pairs = sorted({(r["numerator"], r["denominator"]) for r in ratio_rows})
    for a, b in pairs:
        fig, ax = plt.subplots(figsize=_FIGSIZE)
        drew = False
        for graph in {r["graph"] for r in ratio_rows}:
            pts = sorted((r["k"], r["ratio"]) for r in ratio_rows
                         if r["numerator"] == a and r["denominator"] == b
                         and r["graph"] == graph)
            if pts:
                ax.plot([p[0] for p in pts], [p[1] for p in pts],
                        marker="o", label=graph)
                drew = True
        if not drew:
            plt.close(fig)
            continue
        ax.axhline(1.0, color="gray", linewidth=0.8, linestyle="--")
        ax.set_xlabel("k")
        ax.set_ylabel(f"avg cut {a} / {b}")
        ax.set_title(f"ratio of averages: {a} vs {b}")
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, f"ratio_{_safe(a)}_over_{_safe(b)}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        created.append(path)
    return created
