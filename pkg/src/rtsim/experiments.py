"""Parameter sweeps over seeded replications, and the built-in scenarios.

A sweep is the cross product of its axes times ``replications``. Runs are
numbered in lexicographic (axis point, replication) order and run ``i`` uses
seed ``base_seed + i``. Runs execute in a process pool, but results are
gathered by run index, so the degree of parallelism never shows in outputs.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Sequence

import numpy as np

from .engine import RunResult, SimConfig, run
from .errors import ConfigError
from .metrics import MetricsSummary, summarize
from .strategy import KINDS, StrategyKind

log = logging.getLogger(__name__)

AXIS_PATHS = ("population_total", "population_mix", "vision", "metabolism_rate", "kdr")
POPULATION_SIZES = (50, 100, 150, 200, 250, 300)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    base: SimConfig
    sweep_axes: tuple[tuple[str, tuple], ...] = ()
    replications: int = 30
    base_seed: int = 0

    def __post_init__(self):
        axes = tuple((str(p), tuple(v)) for p, v in self.sweep_axes)
        object.__setattr__(self, "sweep_axes", axes)
        for path, values in axes:
            if path not in AXIS_PATHS:
                raise ConfigError(f"unsupported sweep axis {path!r}; expected one of {AXIS_PATHS}")
            if not values:
                raise ConfigError(f"sweep axis {path!r} has no values")
        if len({p for p, _ in axes}) != len(axes):
            raise ConfigError("duplicate sweep axis")
        if not (isinstance(self.replications, (int, np.integer)) and self.replications >= 1):
            raise ConfigError(f"replications must be a positive integer, got {self.replications!r}")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigError(f"base_seed must fit in 64 unsigned bits, got {self.base_seed}")
        for point in self.points():
            point_config(self.base, dict(zip(self.axis_names, point)))

    @property
    def axis_names(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.sweep_axes)

    def points(self) -> list[tuple]:
        return list(itertools.product(*(v for _, v in self.sweep_axes)))

    @property
    def n_runs(self) -> int:
        return len(self.points()) * self.replications

    def plan(self) -> list["PlannedRun"]:
        out = []
        for p_idx, point in enumerate(self.points()):
            cfg = point_config(self.base, dict(zip(self.axis_names, point)))
            for rep in range(self.replications):
                i = p_idx * self.replications + rep
                seed = self.base_seed + i
                if seed >= 2**64:
                    raise ConfigError("base_seed + run index overflows 64 bits")
                out.append(PlannedRun(i, point, rep, seed, cfg.with_seed(seed)))
        return out

    def to_dict(self) -> dict:
        return {"schema": 1, "name": self.name, "base": self.base.to_dict(),
                "sweep_axes": [[p, list(v)] for p, v in self.sweep_axes],
                "replications": self.replications, "base_seed": self.base_seed}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = {"schema", "name", "base", "sweep_axes", "replications", "base_seed"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
        if d.get("schema", 1) != 1:
            raise ConfigError(f"unsupported experiment schema {d['schema']!r}")
        axes = d.get("sweep_axes", [])
        if isinstance(axes, dict):
            axes = list(axes.items())
        return cls(name=str(d.get("name", "sweep")), base=SimConfig.from_dict(d.get("base", {})),
                   sweep_axes=tuple((p, tuple(v)) for p, v in axes),
                   replications=int(d.get("replications", 30)), base_seed=int(d.get("base_seed", 0)))


@dataclass(frozen=True)
class PlannedRun:
    index: int
    point: tuple
    replication: int
    seed: int
    config: SimConfig


def _mix_weights(value) -> dict[StrategyKind, float]:
    if isinstance(value, str) and value.lower() in ("equal", "mixed"):
        return {k: 1.0 for k in KINDS}
    if isinstance(value, (str, StrategyKind)):
        return {StrategyKind.parse(value): 1.0}
    if isinstance(value, dict):
        weights = {StrategyKind.parse(k): float(w) for k, w in value.items()}
        if any(w < 0 for w in weights.values()) or sum(weights.values()) <= 0:
            raise ConfigError(f"bad population mix {value!r}")
        return weights
    raise ConfigError(f"bad population mix {value!r}; use a kind name, 'equal', or a weight map")


def allocate(total: int, weights: dict[StrategyKind, float]) -> tuple[tuple[StrategyKind, int], ...]:
    """Split ``total`` agents by ``weights`` with largest-remainder rounding.

    Leftover agents go to the largest remainders, ties in strategy order.
    """
    kinds = [k for k in KINDS if weights.get(k, 0) > 0]
    wsum = sum(weights[k] for k in kinds)
    quotas = [total * weights[k] / wsum for k in kinds]
    counts = [math.floor(q) for q in quotas]
    order = sorted(range(len(kinds)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[: total - sum(counts)]:
        counts[i] += 1
    return tuple((k, c) for k, c in zip(kinds, counts))


def point_config(base: SimConfig, assignment: dict[str, Any]) -> SimConfig:
    """``base`` with each named axis set to its value."""
    kw: dict[str, Any] = {}
    if "population_total" in assignment or "population_mix" in assignment:
        if "population_mix" in assignment:
            weights = _mix_weights(assignment["population_mix"])
        else:
            weights = {}
            for k, n in base.population:
                weights[k] = weights.get(k, 0) + n
        total = int(assignment.get("population_total", base.n_agents))
        if total < 1:
            raise ConfigError(f"population_total must be >= 1, got {total}")
        kw["population"] = allocate(total, weights)
    if "vision" in assignment:
        kw["vision"] = int(assignment["vision"])
    if "metabolism_rate" in assignment:
        kw["metabolism_rate"] = float(assignment["metabolism_rate"])
    if "kdr" in assignment:
        kw["kdr"] = float(assignment["kdr"])
    return replace(base, **kw)


@dataclass
class SweepRow:
    run_index: int
    point: tuple
    replication: int
    seed: int
    summary: Optional[MetricsSummary]
    error: Optional[str] = None
    result: Optional[RunResult] = field(default=None, repr=False)


@dataclass
class SweepResult:
    spec: ExperimentSpec
    rows: list[SweepRow]
    aggregates: list[dict]

    def rows_at(self, point: Sequence) -> list[SweepRow]:
        point = tuple(point)
        return [r for r in self.rows if r.point == point]


def _execute(task: tuple[int, SimConfig, bool, tuple[int, ...]]):
    index, config, keep, snapshot_ticks = task
    try:
        result = run(config, snapshot_ticks=snapshot_ticks)
        return index, summarize(result), None, (result if keep else None)
    except Exception as exc:  # recorded per row; a sweep never aborts on one run
        return index, None, f"{type(exc).__name__}: {exc}", None


def default_jobs() -> int:
    return os.cpu_count() or 1


def run_sweep(spec: ExperimentSpec, jobs: Optional[int] = None, keep_results: bool = False,
              snapshot_ticks: Sequence[int] = ()) -> SweepResult:
    """Execute every planned run of ``spec``.

    ``keep_results`` retains each full RunResult on its row (needed for
    per-run JSON). Snapshots, when requested, are taken for replication 0
    of every axis point only.
    """
    plan = spec.plan()
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    snaps = tuple(int(t) for t in snapshot_ticks)
    tasks = [(p.index, p.config, keep_results or (bool(snaps) and p.replication == 0),
              snaps if p.replication == 0 else ()) for p in plan]
    log.info("sweep %s: %d runs on %d worker(s)", spec.name, len(tasks), jobs)
    if jobs == 1 or len(tasks) <= 1:
        outputs = [_execute(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_execute, tasks, chunksize=chunk))
    outputs.sort(key=lambda o: o[0])
    rows = []
    for p, (index, summary, error, result) in zip(plan, outputs):
        if error:
            log.warning("run %d (point %s, rep %d) failed: %s", index, p.point, p.replication, error)
        rows.append(SweepRow(index, p.point, p.replication, p.seed, summary, error, result))
    return SweepResult(spec=spec, rows=rows, aggregates=aggregate(spec, rows))


def _mean_sd(values: list[float]) -> tuple[float, float]:
    if not values:
        return float("nan"), float("nan")
    arr = np.asarray(values, dtype=np.float64)
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), sd


def aggregate(spec: ExperimentSpec, rows: list[SweepRow]) -> list[dict]:
    """Mean and sd of each per-kind scalar metric at each axis point."""
    out = []
    for point in spec.points():
        ok = [r.summary for r in rows if r.point == point and r.summary is not None]
        for kind in KINDS:
            k = kind.value
            present = [s for s in ok if s.count_by_kind[k] > 0]
            if not present:
                continue
            stats = {
                "ica": [s.mean_ica_by_kind[k] for s in present],
                "gini": [s.gini_by_kind[k] for s in present],
                "coverage": [s.coverage for s in present],
                "progress": [s.progress for s in present],
                "survivors_final": [s.survivors_final(k) for s in present],
                "starved_fraction": [s.starved_by_kind[k] / s.count_by_kind[k] for s in present],
                "not_starved": [s.count_by_kind[k] - s.starved_by_kind[k] for s in present],
            }
            ms = {name: _mean_sd(v) for name, v in stats.items()}
            out.append({
                "point": point,
                "kind": k,
                "n_runs": len(present),
                "count": present[0].count_by_kind[k],
                "mean_ica": ms["ica"][0], "sd_ica": ms["ica"][1],
                "gini_mean": ms["gini"][0], "gini_sd": ms["gini"][1],
                "coverage_mean": ms["coverage"][0], "coverage_sd": ms["coverage"][1],
                "progress_mean": ms["progress"][0], "progress_sd": ms["progress"][1],
                "survivors_final_mean": ms["survivors_final"][0],
                "survivors_final_sd": ms["survivors_final"][1],
                "starved_fraction_mean": ms["starved_fraction"][0],
                "starved_fraction_sd": ms["starved_fraction"][1],
                "not_starved_mean": ms["not_starved"][0], "not_starved_sd": ms["not_starved"][1],
            })
    return out


def _equal_population(total: int = 200) -> tuple[tuple[StrategyKind, int], ...]:
    return allocate(total, {k: 1.0 for k in KINDS})


def builtin_scenarios(replications: int = 30, base_seed: int = 0,
                      base: Optional[SimConfig] = None) -> list[ExperimentSpec]:
    """The single-strategy and mixed-population studies at their standard settings."""
    base = base or SimConfig()
    mixed = replace(base, population=_equal_population(200))
    kinds = tuple(k.value for k in KINDS)
    common = dict(replications=replications, base_seed=base_seed)
    return [
        ExperimentSpec("single-coverage", mixed,
                       (("population_mix", kinds), ("population_total", POPULATION_SIZES)), **common),
        ExperimentSpec("single-ica", mixed, (("population_mix", kinds),), **common),
        ExperimentSpec("mixed-vision", mixed, (("vision", (1, 10)),), **common),
        ExperimentSpec("mixed-metabolism", mixed, (("metabolism_rate", (0.2, 0.8)),), **common),
        ExperimentSpec("mixed-kdr", mixed, (("kdr", (0.05, 0.5)),), **common),
    ]


def scenario(name: str, **kwargs) -> ExperimentSpec:
    for spec in builtin_scenarios(**kwargs):
        if spec.name == name:
            return spec
    names = [s.name for s in builtin_scenarios()]
    raise ConfigError(f"unknown scenario {name!r}; available: {', '.join(names)}")
