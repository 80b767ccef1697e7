"""Accuracy-versus-failure-fraction line charts, one SVG per (scenario kind, learner, split)."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_LABELS = {"secoe": "SECOE", "base": "Base model", "random_selection": "Random-Selection"}


def _series_label(approach: str, num_models: int) -> str:
    name = _LABELS.get(approach, approach)
    return name if approach == "base" else f"{name} ({num_models} models)"


def render_plots(summary: Sequence[dict], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    panels: dict[tuple, dict[tuple, list[dict]]] = defaultdict(lambda: defaultdict(list))
    for s in summary:
        panels[(s["scenario_kind"], s["learner"], float(s["split"]))][(s["approach"], int(s["num_models"]))].append(s)
    written = []
    with plt.rc_context({"svg.hashsalt": "secoe", "svg.fonttype": "none"}):
        for (kind, learner, split), series in sorted(panels.items()):
            fig, ax = plt.subplots(figsize=(6.4, 4.2))
            for (approach, n_models), pts in sorted(series.items()):
                pts = sorted(pts, key=lambda p: p["fraction"])
                xs = [100 * p["fraction"] for p in pts]
                ax.errorbar(xs, [p["mean_accuracy"] for p in pts], yerr=[p["ci_half_width"] for p in pts],
                            marker="o", capsize=3, label=_series_label(approach, n_models))
            ax.set_xlabel("failed sensors (%)")
            ax.set_ylabel("test accuracy")
            ax.set_ylim(0.0, 1.02)
            ax.set_title(f"{kind} failures, {learner}, train {int(round(100 * split))}%")
            ax.grid(alpha=0.3)
            ax.legend(fontsize=8)
            fig.tight_layout()
            path = out_dir / f"{kind}_{learner}_train{int(round(100 * split))}.svg"
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
            written.append(path)
    return written
