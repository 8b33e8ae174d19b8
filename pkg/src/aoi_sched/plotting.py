"""SVG charts rendered from comparison.csv alone."""
from __future__ import annotations

import os
from pathlib import Path
from typing import Dict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed ids and no timestamp, so re-rendering the same CSV gives the same bytes
STYLE = {
    "svg.hashsalt": "aoi-sched",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.4,
    "lines.linewidth": 1.5,
    "lines.markersize": 4,
    "figure.figsize": (6.4, 4.0),
}

LABELS = {"hlfd": "HLF-D", "hlf": "HLF", "edf": "EDF", "llf": "LLF"}
MARKERS = {"hlfd": "o", "hlf": "s", "edf": "^", "llf": "v"}


def _save(fig, path: Path) -> None:
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        fig.savefig(tmp, format="svg", metadata={"Date": None})
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        tmp.unlink(missing_ok=True)


def exwsuoi_chart(rows, path: Path) -> Path:
    """EXWSUoI against horizon, one line per policy."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for pol in dict.fromkeys(r["policy"] for r in rows):
            pts = sorted((r["horizon"], r["exwsuoi_mean"]) for r in rows if r["policy"] == pol)
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker=MARKERS.get(pol, "o"), label=LABELS.get(pol, pol))
        ax.set_xlabel("horizon T (slots)")
        ax.set_ylabel("EXWSUoI (1/slot)")
        ax.legend()
        fig.tight_layout()
        _save(fig, path)
    return path


def metrics_chart(rows, path: Path) -> Path:
    """Grouped bars of mean age, latency and RMS jitter at the largest horizon."""
    horizon = max(r["horizon"] for r in rows)
    sel = [r for r in rows if r["horizon"] == horizon]
    metrics = [("mean_age", "mean age"), ("mean_latency", "mean latency"), ("rms_jitter", "RMS jitter")]
    width = 0.8 / max(len(sel), 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for j, r in enumerate(sel):
            xs = [m + (j - (len(sel) - 1) / 2) * width for m in range(len(metrics))]
            ax.bar(xs, [r[f"{key}_mean"] for key, _ in metrics], width,
                   label=LABELS.get(r["policy"], r["policy"]))
        ax.set_xticks(range(len(metrics)))
        ax.set_xticklabels([label for _, label in metrics])
        ax.set_ylabel("slots")
        ax.set_title(f"T = {horizon}")
        ax.legend()
        fig.tight_layout()
        _save(fig, path)
    return path


def render_charts(comparison_path, out_dir) -> Dict[str, Path]:
    from .experiment import read_comparison

    rows = read_comparison(comparison_path)
    out = Path(out_dir)
    return {
        "exwsuoi_chart": exwsuoi_chart(rows, out / "exwsuoi_vs_horizon.svg"),
        "metrics_chart": metrics_chart(rows, out / "metrics_bars.svg"),
    }
