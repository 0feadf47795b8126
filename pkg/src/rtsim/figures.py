"""Matplotlib figures rendered from the CSV tables a run or sweep wrote.

Figures are read back from disk rather than from in-memory results so that
``rtsim render DIR`` can redraw any earlier output directory.
"""

from __future__ import annotations

import csv
import re
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import OutputError  # noqa: E402
from .strategy import KINDS  # noqa: E402

COLORS = {"expert": "#c0392b", "follower": "#2e86c1", "maverick": "#28b463", "conservative": "#7d3c98"}

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "savefig.dpi": 120,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.frameon": False,
}


def _read(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", text).strip("_") or "all"


def _save(fig, path: Path) -> Path:
    try:
        fig.savefig(path, bbox_inches="tight")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None
    finally:
        plt.close(fig)
    return path


def render_run(out_dir) -> list[Path]:
    out = Path(out_dir)
    written = []
    with plt.rc_context(STYLE):
        ticks = _read(out / "ticks.csv")
        t = [int(r["tick"]) for r in ticks]
        fig, ax = plt.subplots()
        for k in KINDS:
            ys = [int(r[f"{k.value}_alive"]) for r in ticks]
            if any(ys):
                ax.plot(t, ys, label=k.value, color=COLORS[k.value])
        ax.set_xlabel("tick")
        ax.set_ylabel("agents alive")
        ax.legend()
        written.append(_save(fig, out / "survival.png"))

        fig, ax = plt.subplots()
        ax.plot(t, [float(r["progress"]) for r in ticks], label="progress", color="k")
        ax.plot(t, [float(r["coverage"]) for r in ticks], label="coverage", color="0.5", ls="--")
        ax.set_xlabel("tick")
        ax.set_ylim(0, 1)
        ax.legend()
        written.append(_save(fig, out / "progress_coverage.png"))

        agents = _read(out / "agents.csv")
        by_kind = defaultdict(list)
        for r in agents:
            by_kind[r["kind"]].append(float(r["ica"]))
        fig, ax = plt.subplots()
        for kind, vals in by_kind.items():
            ax.hist(vals, bins=20, histtype="step", lw=1.5, label=kind, color=COLORS[kind])
        ax.set_xlabel("ICA")
        ax.set_ylabel("agents")
        ax.legend()
        written.append(_save(fig, out / "ica_histogram.png"))
    return written


def render_sweep(out_dir) -> list[Path]:
    out = Path(out_dir)
    written = []
    agg = _read(out / "aggregates.csv")
    if not agg:
        return written
    axis_name = agg[0]["axis_name"]
    points = list(dict.fromkeys(r["axis_value"] for r in agg))
    kinds = [k.value for k in KINDS if any(r["kind"] == k.value for r in agg)]
    panels = [("coverage_mean", "coverage_sd", "coverage"), ("progress_mean", "progress_sd", "progress"),
              ("mean_ica", "sd_ica", "mean ICA"), ("gini_mean", "gini_sd", "ICA Gini"),
              ("survivors_final_mean", "survivors_final_sd", "survivors at end")]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(len(panels), 1, figsize=(max(6.0, 0.5 * len(points) * len(kinds)), 2.2 * len(panels)),
                                 sharex=True)
        width = 0.8 / len(kinds)
        for ax, (mean_col, sd_col, label) in zip(axes, panels):
            for j, kind in enumerate(kinds):
                xs, ys, es = [], [], []
                for i, p in enumerate(points):
                    row = next((r for r in agg if r["axis_value"] == p and r["kind"] == kind), None)
                    if row is None:
                        continue
                    xs.append(i + (j - (len(kinds) - 1) / 2) * width)
                    ys.append(float(row[mean_col]))
                    es.append(float(row[sd_col]))
                ax.bar(xs, ys, width, yerr=es, label=kind, color=COLORS[kind], capsize=2)
            ax.set_ylabel(label)
        axes[0].legend(ncol=len(kinds))
        axes[-1].set_xticks(range(len(points)))
        axes[-1].set_xticklabels(points, rotation=45 if len(points) > 6 else 0, ha="right" if len(points) > 6 else "center")
        axes[-1].set_xlabel(axis_name)
        written.append(_save(fig, out / "metrics_by_point.png"))

        hist = _read(out / "histograms.csv") if (out / "histograms.csv").exists() else []
        for p in points:
            rows = [r for r in hist if r["axis_value"] == p]
            if not rows:
                continue
            fig, ax = plt.subplots()
            for kind in kinds:
                kr = [r for r in rows if r["kind"] == kind]
                if not kr:
                    continue
                centers = [(float(r["bin_lo"]) + float(r["bin_hi"])) / 2 for r in kr]
                total = sum(int(r["count"]) for r in kr) or 1
                ax.plot(centers, [int(r["count"]) / total for r in kr], marker="o", ms=3,
                        label=kind, color=COLORS[kind])
            ax.set_xlabel("ICA")
            ax.set_ylabel("fraction of agents")
            ax.set_title(f"{axis_name} = {p}")
            ax.legend()
            written.append(_save(fig, out / f"ica_hist_{_slug(p)}.png"))

        surv = _read(out / "survival.csv") if (out / "survival.csv").exists() else []
        for p in points:
            rows = [r for r in surv if r["axis_value"] == p]
            if not rows:
                continue
            fig, ax = plt.subplots()
            for kind in kinds:
                kr = [r for r in rows if r["kind"] == kind]
                if kr:
                    ax.plot([int(r["tick"]) for r in kr], [float(r["survivors_mean"]) for r in kr],
                            label=kind, color=COLORS[kind])
            ax.set_xlabel("tick")
            ax.set_ylabel("mean agents alive")
            ax.set_title(f"{axis_name} = {p}")
            ax.legend()
            written.append(_save(fig, out / f"survival_{_slug(p)}.png"))
    return written


def render(out_dir) -> list[Path]:
    """Redraw whatever figures the tables in ``out_dir`` support."""
    out = Path(out_dir)
    if (out / "aggregates.csv").exists():
        return render_sweep(out)
    if (out / "ticks.csv").exists() and (out / "agents.csv").exists():
        return render_run(out)
    raise OutputError(f"{out}: no ticks.csv/agents.csv or aggregates.csv to render")
