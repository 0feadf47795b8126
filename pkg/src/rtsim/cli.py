"""Command line interface: ``rtsim run|sweep|scenario|render``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .engine import SimConfig, run
from .errors import ConfigError, InvariantError, OutputError, RTSError
from .experiments import ExperimentSpec, builtin_scenarios, default_jobs, run_sweep, scenario
from .figures import render
from .report import FORMATS, write_run, write_sweep

log = logging.getLogger("rtsim")


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(d: dict, assignments: Sequence[str]) -> dict:
    """Apply ``a.b.c=value`` assignments to a nested dict (values parsed as JSON)."""
    d = json.loads(json.dumps(d))
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        parts = key.split(".")
        node = d
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set {key}: {part!r} is not an object")
        node[parts[-1]] = _parse_value(raw)
    return d


def _parse_ticks(text: Optional[str]) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"--snapshot-ticks expects comma-separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, jobs: bool = False) -> None:
    p.add_argument("--seed", type=int, help="run seed (run) or base seed (sweep/scenario)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--format", choices=FORMATS, default="both")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.add_argument("--snapshot-ticks", help="comma-separated ticks to export as PGM snapshots")
    if jobs:
        p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
        p.add_argument("--replications", type=int, help="override replications per axis point")
        p.add_argument("--per-run-json", action="store_true", help="also write one JSON per run")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtsim", description="Research topic selection simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one simulation")
    p.add_argument("--config", help="JSON run config (defaults when omitted)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field, e.g. --set landscape.noise_amplitude=0.5")
    _common(p)

    p = sub.add_parser("sweep", help="run a parameter sweep from an experiment JSON")
    p.add_argument("--config", required=True, help="JSON experiment spec")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a field of the base config")
    _common(p, jobs=True)

    p = sub.add_parser("scenario", help="run a built-in scenario ('list' to show, 'all' for every one)")
    p.add_argument("name")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a field of the base config")
    _common(p, jobs=True)

    p = sub.add_parser("render", help="redraw figures from an output directory")
    p.add_argument("dir", type=Path)
    return parser


def _cmd_run(args) -> int:
    data = _load_json(args.config) if args.config else SimConfig().to_dict()
    data = apply_overrides(data, args.set)
    if args.seed is not None:
        data["run_seed"] = args.seed
    config = SimConfig.from_dict(data)
    t0 = time.perf_counter()
    result = run(config, snapshot_ticks=_parse_ticks(args.snapshot_ticks))
    log.info("run finished in %.3fs", time.perf_counter() - t0)
    out = args.out or Path("rtsim-run")
    write_run(result, out, args.format, figures=not args.no_figures)
    last = result.ticks[-1]
    print(f"tick {last.tick}: progress={last.progress:.4f} coverage={last.coverage:.4f} "
          f"alive={sum(last.survivors_by_kind.values())} -> {out}")
    return 0


def _base_with_overrides(base: SimConfig, assignments) -> SimConfig:
    if not assignments:
        return base
    return SimConfig.from_dict(apply_overrides(base.to_dict(), assignments))


def _execute_spec(spec: ExperimentSpec, args, out: Path) -> None:
    t0 = time.perf_counter()
    sweep = run_sweep(spec, jobs=args.jobs, keep_results=args.per_run_json,
                      snapshot_ticks=_parse_ticks(args.snapshot_ticks))
    failed = sum(r.error is not None for r in sweep.rows)
    write_sweep(sweep, out, args.format, per_run_json=args.per_run_json, figures=not args.no_figures)
    print(f"{spec.name}: {len(sweep.rows)} runs ({failed} failed) in "
          f"{time.perf_counter() - t0:.1f}s -> {out}")


def _cmd_sweep(args) -> int:
    data = _load_json(args.config)
    if args.set:
        data["base"] = apply_overrides(data.get("base", {}), args.set)
    if args.seed is not None:
        data["base_seed"] = args.seed
    if args.replications is not None:
        data["replications"] = args.replications
    spec = ExperimentSpec.from_dict(data)
    _execute_spec(spec, args, args.out or Path(f"rtsim-{spec.name}"))
    return 0


def _cmd_scenario(args) -> int:
    kw = {}
    if args.seed is not None:
        kw["base_seed"] = args.seed
    if args.replications is not None:
        kw["replications"] = args.replications
    base = _base_with_overrides(SimConfig(), args.set)
    specs = builtin_scenarios(base=base, **kw)
    if args.name == "list":
        for s in specs:
            axes = ", ".join(f"{p}={list(v)}" for p, v in s.sweep_axes)
            print(f"{s.name:18s} {s.n_runs:5d} runs  {axes}")
        return 0
    if args.name == "all":
        root = args.out or Path("rtsim-scenarios")
        for s in specs:
            _execute_spec(s, args, root / s.name)
        return 0
    spec = scenario(args.name, base=base, **kw)
    _execute_spec(spec, args, args.out or Path(f"rtsim-{spec.name}"))
    return 0


def _cmd_render(args) -> int:
    for path in render(args.dir):
        print(path)
    return 0


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "scenario": _cmd_scenario, "render": _cmd_render}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", None) is None and hasattr(args, "jobs"):
        args.jobs = default_jobs()
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    except OutputError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return OutputError.exit_code
    except InvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        for k, v in exc.state.items():
            print(f"  {k}: {v}", file=sys.stderr)
        return InvariantError.exit_code
    except RTSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
