"""Evaluation metrics: progress, coverage, ICA distributions, inequality."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .strategy import KINDS, StrategyKind

if TYPE_CHECKING:
    from .engine import Agent, RunResult
    from .landscape import Landscape

HIST_BINS = 20


def progress(initial_total: float, current_total: float) -> float:
    """Fraction of the initial significance consumed so far."""
    if initial_total <= 0:
        return 0.0
    return (initial_total - current_total) / initial_total


def coverage(landscape: "Landscape") -> float:
    visited = landscape.visited
    return float(np.count_nonzero(visited)) / visited.size


def ica_distribution(agents_final: Sequence["Agent"], kind: StrategyKind | str) -> list[float]:
    kind = StrategyKind.parse(kind)
    return [a.ica for a in sorted(agents_final, key=lambda a: a.id) if a.kind is kind]


def gini(values: Sequence[float]) -> float:
    """Gini coefficient: mean absolute difference over twice the mean.

    Computed from the sorted values in O(n log n); 0 when every value is 0.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = v.size
    if n == 0:
        raise ValueError("gini of an empty sequence is undefined")
    if np.any(v < 0):
        raise ValueError("gini requires nonnegative values")
    total = v.sum()
    if total <= 0:
        return 0.0
    # sum_{i,j} |v_i - v_j| = 2 * sum_i (2i - n + 1) v_(i) for 0-based sorted index i
    ranks = 2.0 * np.arange(n) - n + 1.0
    g = float(np.dot(ranks, v) / (n * total))
    return min(max(g, 0.0), 1.0)


def survival_curve(run_result: "RunResult", kind: StrategyKind | str) -> list[int]:
    """Living agents of ``kind`` at each recorded tick.

    Runs that end early because everyone departed are padded with zeros out to
    ``max_ticks`` so curves from different runs line up.
    """
    kind = StrategyKind.parse(kind)
    curve = [t.survivors_by_kind[kind.value] for t in run_result.ticks]
    curve += [0] * (run_result.config.max_ticks + 1 - len(curve))
    return curve


def histogram(values: Sequence[float], bins: int = HIST_BINS, upper: float | None = None):
    """Equal-width counts over ``[0, upper]`` (``upper`` defaults to the max)."""
    v = np.asarray(values, dtype=np.float64)
    if upper is None:
        upper = float(v.max()) if v.size else 0.0
    if upper <= 0:
        upper = 1.0
    counts, edges = np.histogram(v, bins=bins, range=(0.0, upper))
    return counts.tolist(), edges.tolist()


def _finite_or_none(x: float):
    return x if np.isfinite(x) else None


@dataclass
class MetricsSummary:
    progress: float
    coverage: float
    ica_values_by_kind: dict[str, list[float]]
    gini_by_kind: dict[str, float]
    mean_ica_by_kind: dict[str, float]
    survival_curve_by_kind: dict[str, list[int]]
    count_by_kind: dict[str, int]
    starved_by_kind: dict[str, int]
    retired_by_kind: dict[str, int]

    def survivors_final(self, kind: str) -> int:
        return self.survival_curve_by_kind[kind][-1]

    def to_dict(self) -> dict:
        return {
            "progress": self.progress,
            "coverage": self.coverage,
            "count_by_kind": self.count_by_kind,
            "mean_ica_by_kind": {k: _finite_or_none(v) for k, v in self.mean_ica_by_kind.items()},
            "gini_by_kind": {k: _finite_or_none(v) for k, v in self.gini_by_kind.items()},
            "starved_by_kind": self.starved_by_kind,
            "retired_by_kind": self.retired_by_kind,
            "survivors_final_by_kind": {k: c[-1] for k, c in self.survival_curve_by_kind.items()},
        }


def summarize(run_result: "RunResult") -> MetricsSummary:
    """Summary metrics for a finished run, keyed by kind name.

    Kinds absent from the population get empty lists and NaN mean/gini.
    """
    last = run_result.ticks[-1]
    ica = {k.value: ica_distribution(run_result.agents_final, k) for k in KINDS}
    starved = {k.value: 0 for k in KINDS}
    retired = {k.value: 0 for k in KINDS}
    for a in run_result.agents_final:
        if a.departure == "starvation":
            starved[a.kind.value] += 1
        elif a.departure == "retirement":
            retired[a.kind.value] += 1
    return MetricsSummary(
        progress=last.progress,
        coverage=last.coverage,
        ica_values_by_kind=ica,
        gini_by_kind={k: gini(v) if v else float("nan") for k, v in ica.items()},
        mean_ica_by_kind={k: float(np.mean(v)) if v else float("nan") for k, v in ica.items()},
        survival_curve_by_kind={k.value: survival_curve(run_result, k) for k in KINDS},
        count_by_kind={k: len(v) for k, v in ica.items()},
        starved_by_kind=starved,
        retired_by_kind=retired,
    )
