"""Write runs and sweeps to disk as CSV/JSON tables, PGM snapshots and figures."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .engine import RunResult
from .errors import OutputError
from .experiments import SweepResult
from .landscape import pgm_bytes
from .metrics import HIST_BINS, histogram, summarize
from .strategy import KINDS

log = logging.getLogger(__name__)

FORMATS = ("json", "csv", "both")

TICKS_COLUMNS = ["tick"] + [f"{k.value}_alive" for k in KINDS] + ["progress", "coverage"]
AGENTS_COLUMNS = ["id", "kind", "ica", "final_wealth", "departure_cause", "departure_tick"]
SUMMARY_COLUMNS = ["kind", "count", "mean_ica", "gini", "survivors_final", "starved", "retired"]
AGGREGATE_COLUMNS = ["axis_name", "axis_value", "kind", "mean_ica", "sd_ica", "gini_mean",
                     "coverage_mean", "progress_mean", "survivors_final_mean",
                     "n_runs", "count", "gini_sd", "coverage_sd", "progress_sd",
                     "survivors_final_sd", "starved_fraction_mean", "starved_fraction_sd",
                     "not_starved_mean", "not_starved_sd"]


def _prepare(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _write_text(path: Path, text: str) -> Path:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None
    return path


def _write_bytes(path: Path, data: bytes) -> Path:
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None
    return path


def _write_csv(path: Path, columns: Sequence[str], rows: Iterable[dict]) -> Path:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n",
                                    extrasaction="ignore")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _cell(v) for k, v in row.items()})
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None
    return path


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _dumps(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_json(path, obj) -> Path:
    return _write_text(Path(path), _dumps(obj))


# single runs

def ticks_rows(result: RunResult) -> list[dict]:
    rows = []
    for t in result.ticks:
        row = {"tick": t.tick, "progress": t.progress, "coverage": t.coverage}
        for k in KINDS:
            row[f"{k.value}_alive"] = t.survivors_by_kind[k.value]
        rows.append(row)
    return rows


def agents_rows(result: RunResult) -> list[dict]:
    return [{"id": a.id, "kind": a.kind.value, "ica": a.ica, "final_wealth": a.wealth,
             "departure_cause": a.departure or "none", "departure_tick": a.departure_tick}
            for a in result.agents_final]


def summary_rows(result: RunResult) -> list[dict]:
    s = summarize(result)
    rows = []
    for k in KINDS:
        n = s.count_by_kind[k.value]
        if n == 0:
            continue
        rows.append({"kind": k.value, "count": n, "mean_ica": s.mean_ica_by_kind[k.value],
                     "gini": s.gini_by_kind[k.value], "survivors_final": s.survivors_final(k.value),
                     "starved": s.starved_by_kind[k.value], "retired": s.retired_by_kind[k.value]})
    return rows


def histogram_rows(values_by_kind: dict[str, list[float]], prefix: dict | None = None) -> list[dict]:
    rows = []
    for kind, values in values_by_kind.items():
        if not values:
            continue
        counts, edges = histogram(values, HIST_BINS)
        for b, c in enumerate(counts):
            rows.append({**(prefix or {}), "kind": kind, "bin": b, "bin_lo": edges[b],
                         "bin_hi": edges[b + 1], "count": c})
    return rows


HIST_COLUMNS = ["kind", "bin", "bin_lo", "bin_hi", "count"]


def write_snapshots(result: RunResult, out_dir) -> list[Path]:
    out = _prepare(out_dir)
    return [_write_bytes(out / f"landscape_t{tick}.pgm", pgm_bytes(grid, result.initial_max))
            for tick, grid in sorted(result.snapshots.items())]


def write_run(result: RunResult, out_dir, fmt: str = "both", figures: bool = True) -> list[Path]:
    """Write one run's tables (and snapshots, figures) into ``out_dir``."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    out = _prepare(out_dir)
    written = [write_json(out / "resolved-config.json", result.config.to_dict())]
    if fmt in ("csv", "both"):
        written.append(_write_csv(out / "ticks.csv", TICKS_COLUMNS, ticks_rows(result)))
        written.append(_write_csv(out / "agents.csv", AGENTS_COLUMNS, agents_rows(result)))
        written.append(_write_csv(out / "summary.csv", SUMMARY_COLUMNS, summary_rows(result)))
        written.append(_write_csv(out / "ica_histogram.csv", HIST_COLUMNS,
                                  histogram_rows(result.ica_by_kind)))
    if fmt in ("json", "both"):
        written.append(_write_text(out / "result.json", result.to_json() + "\n"))
    written += write_snapshots(result, out)
    if figures and fmt in ("csv", "both"):
        from .figures import render_run

        written += render_run(out)
    return written


# sweeps

def _axis_cells(spec, point) -> dict:
    return {"axis_name": "|".join(spec.axis_names) or "none",
            "axis_value": "|".join(str(v) for v in point) or "-"}


def sweep_row_dicts(sweep: SweepResult) -> list[dict]:
    rows = []
    names = sweep.spec.axis_names
    for r in sweep.rows:
        base = {"run_index": r.run_index, **dict(zip(names, r.point)),
                "replication": r.replication, "seed": r.seed}
        if r.summary is None:
            rows.append({**base, "error": r.error})
            continue
        s = r.summary
        for k in KINDS:
            n = s.count_by_kind[k.value]
            if n == 0:
                continue
            rows.append({**base, "kind": k.value, "count": n,
                         "mean_ica": s.mean_ica_by_kind[k.value], "gini": s.gini_by_kind[k.value],
                         "survivors_final": s.survivors_final(k.value),
                         "starved": s.starved_by_kind[k.value], "retired": s.retired_by_kind[k.value],
                         "coverage": s.coverage, "progress": s.progress, "error": None})
    return rows


def sweep_row_columns(sweep: SweepResult) -> list[str]:
    return (["run_index", *sweep.spec.axis_names, "replication", "seed", "kind", "count",
             "mean_ica", "gini", "survivors_final", "starved", "retired", "coverage", "progress",
             "error"])


def aggregate_rows(sweep: SweepResult) -> list[dict]:
    return [{**_axis_cells(sweep.spec, a["point"]), **{k: v for k, v in a.items() if k != "point"}}
            for a in sweep.aggregates]


def sweep_histogram_rows(sweep: SweepResult) -> list[dict]:
    """ICA histograms pooled over the replications at each axis point."""
    rows = []
    for point in sweep.spec.points():
        pooled: dict[str, list[float]] = {k.value: [] for k in KINDS}
        for r in sweep.rows_at(point):
            if r.summary is not None:
                for k, v in r.summary.ica_values_by_kind.items():
                    pooled[k].extend(v)
        rows += histogram_rows(pooled, _axis_cells(sweep.spec, point))
    return rows


def sweep_survival_rows(sweep: SweepResult) -> list[dict]:
    rows = []
    for point in sweep.spec.points():
        done = [r.summary for r in sweep.rows_at(point) if r.summary is not None]
        for k in KINDS:
            curves = [s.survival_curve_by_kind[k.value] for s in done if s.count_by_kind[k.value]]
            if not curves:
                continue
            arr = np.asarray(curves, dtype=np.float64)
            mean = arr.mean(axis=0)
            sd = arr.std(axis=0, ddof=1) if len(curves) > 1 else np.zeros(arr.shape[1])
            for tick in range(arr.shape[1]):
                rows.append({**_axis_cells(sweep.spec, point), "kind": k.value, "tick": tick,
                             "survivors_mean": float(mean[tick]), "survivors_sd": float(sd[tick])})
    return rows


def sweep_to_dict(sweep: SweepResult) -> dict:
    return {
        "spec": sweep.spec.to_dict(),
        "rows": [{"run_index": r.run_index, "point": list(r.point), "replication": r.replication,
                  "seed": r.seed, "error": r.error,
                  "summary": r.summary.to_dict() if r.summary is not None else None}
                 for r in sweep.rows],
        "aggregates": [{**a, "point": list(a["point"])} for a in sweep.aggregates],
    }


def write_sweep(sweep: SweepResult, out_dir, fmt: str = "both", per_run_json: bool = False,
                figures: bool = True) -> list[Path]:
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    out = _prepare(out_dir)
    written = [write_json(out / "resolved-config.json", sweep.spec.to_dict())]
    if fmt in ("csv", "both"):
        written.append(_write_csv(out / "rows.csv", sweep_row_columns(sweep), sweep_row_dicts(sweep)))
        written.append(_write_csv(out / "aggregates.csv", AGGREGATE_COLUMNS, aggregate_rows(sweep)))
        written.append(_write_csv(out / "histograms.csv", ["axis_name", "axis_value", *HIST_COLUMNS],
                                  sweep_histogram_rows(sweep)))
        written.append(_write_csv(out / "survival.csv",
                                  ["axis_name", "axis_value", "kind", "tick", "survivors_mean",
                                   "survivors_sd"], sweep_survival_rows(sweep)))
    if fmt in ("json", "both"):
        written.append(write_json(out / "sweep.json", sweep_to_dict(sweep)))
    if per_run_json:
        runs_dir = _prepare(out / "runs")
        for r in sweep.rows:
            if r.result is not None:
                written.append(_write_text(runs_dir / f"run_{r.run_index:05d}.json",
                                           r.result.to_json() + "\n"))
    for p_idx, point in enumerate(sweep.spec.points()):
        for r in sweep.rows_at(point):
            if r.replication == 0 and r.result is not None and r.result.snapshots:
                written += write_snapshots(r.result, out / f"point_{p_idx:03d}")
    if figures and fmt in ("csv", "both"):
        from .figures import render_sweep

        written += render_sweep(out)
    return written
