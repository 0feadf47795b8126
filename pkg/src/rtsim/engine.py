"""One seeded simulation run: initialise, tick, record.

Agent state lives in parallel numpy arrays inside :class:`SimState` so the
per-tick loop can run as a single numba kernel. :class:`Agent` records are
materialised on demand for reporting.

Tick order: shuffle the living agents, then each in turn looks, moves and
collects against the world as left by earlier movers; afterwards every
living agent's wealth decays by ``(1 - metabolism_rate)`` and ages one tick;
finally agents below the survival threshold starve and agents at the
retirement age retire.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Optional

import numba
import numpy as np

from . import metrics
from .errors import ConfigError, InvariantError
from .landscape import (Landscape, LandscapeConfig, Position, generate_landscape,
                        total_significance, vision_offsets)
from .strategy import KINDS, StrategyKind, choose_index

SCHEMA_VERSION = 1

NO_DEPARTURE, STARVATION, RETIREMENT = 0, 1, 2
CAUSE_NAMES = {STARVATION: "starvation", RETIREMENT: "retirement"}

_SIM_KEYS = ("vision", "metabolism_rate", "kdr", "retirement_age", "initial_wealth",
             "survival_threshold", "max_ticks", "run_seed")


@dataclass(frozen=True)
class SimConfig:
    landscape: LandscapeConfig = field(default_factory=LandscapeConfig)
    population: tuple[tuple[StrategyKind, int], ...] = tuple((k, 50) for k in KINDS)
    vision: int = 1
    metabolism_rate: float = 0.2
    kdr: float = 0.05
    retirement_age: int = 100
    initial_wealth: float = 5.0
    survival_threshold: float = 0.5
    max_ticks: int = 100
    run_seed: int = 0

    def __post_init__(self):
        pop = tuple((StrategyKind.parse(k), int(n)) for k, n in self.population)
        object.__setattr__(self, "population", pop)
        if any(n < 0 for _, n in pop):
            raise ConfigError("population counts must be >= 0")
        if sum(n for _, n in pop) < 1:
            raise ConfigError("population must contain at least one agent")
        if not (isinstance(self.vision, (int, np.integer)) and self.vision >= 1):
            raise ConfigError(f"vision must be a positive integer, got {self.vision!r}")
        if not 0 <= self.metabolism_rate < 1:
            raise ConfigError(f"metabolism_rate must be in [0, 1), got {self.metabolism_rate}")
        if not 0 < self.kdr <= 1:
            raise ConfigError(f"kdr must be in (0, 1], got {self.kdr}")
        if not (isinstance(self.retirement_age, (int, np.integer)) and self.retirement_age >= 1):
            raise ConfigError(f"retirement_age must be a positive integer, got {self.retirement_age!r}")
        if not self.initial_wealth >= 0:
            raise ConfigError(f"initial_wealth must be >= 0, got {self.initial_wealth}")
        if not self.survival_threshold > 0:
            raise ConfigError(f"survival_threshold must be > 0, got {self.survival_threshold}")
        if not (isinstance(self.max_ticks, (int, np.integer)) and self.max_ticks >= 0):
            raise ConfigError(f"max_ticks must be a nonnegative integer, got {self.max_ticks!r}")
        if not 0 <= self.run_seed < 2**64:
            raise ConfigError(f"run_seed must fit in 64 unsigned bits, got {self.run_seed}")

    @property
    def n_agents(self) -> int:
        return sum(n for _, n in self.population)

    @property
    def counts_by_kind(self) -> dict[str, int]:
        out = {k.value: 0 for k in KINDS}
        for k, n in self.population:
            out[k.value] += n
        return out

    def with_seed(self, seed: int) -> "SimConfig":
        return replace(self, run_seed=int(seed))

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"schema": SCHEMA_VERSION, "landscape": self.landscape.to_dict(),
                             "population": [[k.value, n] for k, n in self.population]}
        for key in _SIM_KEYS:
            d[key] = getattr(self, key)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        schema = d.pop("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema {schema!r} (expected {SCHEMA_VERSION})")
        unknown = set(d) - set(_SIM_KEYS) - {"landscape", "population"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw: dict[str, Any] = {k: d[k] for k in _SIM_KEYS if k in d}
        if "landscape" in d:
            kw["landscape"] = LandscapeConfig.from_dict(d["landscape"])
        if "population" in d:
            kw["population"] = parse_population(d["population"])
        for key in ("metabolism_rate", "kdr", "initial_wealth", "survival_threshold"):
            if key in kw:
                kw[key] = float(kw[key])
        return cls(**kw)


def parse_population(value) -> tuple[tuple[StrategyKind, int], ...]:
    """Accept ``[[kind, n], ...]`` or ``{kind: n}``."""
    try:
        items = value.items() if isinstance(value, dict) else value
        return tuple((StrategyKind.parse(k), int(n)) for k, n in items)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad population {value!r}") from None


@dataclass
class Agent:
    id: int
    kind: StrategyKind
    pos: Position
    wealth: float
    ica: float
    age: int
    vision: int
    alive: bool
    departure: Optional[str] = None
    departure_tick: Optional[int] = None

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind.value, "pos": list(self.pos),
                "wealth": self.wealth, "ica": self.ica, "age": self.age, "vision": self.vision,
                "alive": self.alive, "departure": self.departure,
                "departure_tick": self.departure_tick}


@dataclass(frozen=True)
class TickReport:
    tick: int
    survivors_by_kind: dict[str, int]
    progress: float
    coverage: float
    departures_this_tick: tuple[tuple[int, str], ...] = ()

    def to_dict(self) -> dict:
        return {"tick": self.tick, "survivors_by_kind": dict(self.survivors_by_kind),
                "progress": self.progress, "coverage": self.coverage,
                "departures": [list(d) for d in self.departures_this_tick]}


@dataclass
class RunResult:
    config: SimConfig
    ticks: list[TickReport]
    agents_final: list[Agent]
    ica_by_kind: dict[str, list[float]]
    initial_total: float
    landscape_final_total: float
    initial_max: float = 0.0
    snapshots: dict[int, np.ndarray] = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "initial_total": self.initial_total,
            "initial_max": self.initial_max,
            "landscape_final_total": self.landscape_final_total,
            "summary": metrics.summarize(self).to_dict(),
            "ticks": [t.to_dict() for t in self.ticks],
            "agents": [a.to_dict() for a in self.agents_final],
            "ica_by_kind": self.ica_by_kind,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=False)


@dataclass
class SimState:
    config: SimConfig
    landscape: Landscape
    rng: np.random.Generator
    kind: np.ndarray
    x: np.ndarray
    y: np.ndarray
    wealth: np.ndarray
    ica: np.ndarray
    age: np.ndarray
    alive: np.ndarray
    dep_cause: np.ndarray
    dep_tick: np.ndarray
    offsets: np.ndarray
    tick: int = 0
    extracted: float = 0.0
    _work: tuple = field(default=(), repr=False)

    @property
    def n_alive(self) -> int:
        return int(np.count_nonzero(self.alive))

    def positions(self) -> list[Position]:
        return [Position(int(a), int(b)) for a, b in zip(self.x, self.y)]

    def agents(self) -> list[Agent]:
        vision = self.config.vision
        out = []
        for i in range(len(self.kind)):
            cause = int(self.dep_cause[i])
            out.append(Agent(
                id=i, kind=KINDS[int(self.kind[i])], pos=Position(int(self.x[i]), int(self.y[i])),
                wealth=float(self.wealth[i]), ica=float(self.ica[i]), age=int(self.age[i]),
                vision=vision, alive=bool(self.alive[i]),
                departure=CAUSE_NAMES.get(cause),
                departure_tick=int(self.dep_tick[i]) if cause else None,
            ))
        return out

    def survivors_by_kind(self) -> dict[str, int]:
        counts = np.bincount(self.kind[self.alive], minlength=len(KINDS))
        return {k.value: int(counts[i]) for i, k in enumerate(KINDS)}

    def report(self, departures: Iterable[tuple[int, str]] = ()) -> TickReport:
        return TickReport(
            tick=self.tick,
            survivors_by_kind=self.survivors_by_kind(),
            progress=metrics.progress(self.landscape.initial_total, total_significance(self.landscape)),
            coverage=metrics.coverage(self.landscape),
            departures_this_tick=tuple(departures),
        )


def init_sim(config: SimConfig) -> SimState:
    landscape = generate_landscape(config.landscape)
    rng = np.random.default_rng(config.run_seed)
    n = config.n_agents
    kind = np.concatenate([np.full(c, k.code, dtype=np.int64) for k, c in config.population])
    w, h = config.landscape.width, config.landscape.height
    # one draw per agent in id order: x then y
    x = np.empty(n, dtype=np.int64)
    y = np.empty(n, dtype=np.int64)
    for i in range(n):
        x[i] = rng.integers(0, w)
        y[i] = rng.integers(0, h)
    np.add.at(landscape.occupancy, (y, x), 1)
    landscape.visited[y, x] = True
    offsets = vision_offsets(config.vision, config.landscape.vision_metric)
    k = len(offsets)
    work = (np.empty(n, np.int64), np.empty(k, np.float64), np.empty(k, np.bool_),
            np.empty(k, np.bool_), np.empty((k, 2), np.int64), np.empty(k, np.bool_),
            np.empty(k, np.int64))
    return SimState(
        config=config, landscape=landscape, rng=rng, kind=kind, x=x, y=y,
        wealth=np.full(n, float(config.initial_wealth)), ica=np.zeros(n),
        age=np.zeros(n, dtype=np.int64), alive=np.ones(n, dtype=np.bool_),
        dep_cause=np.zeros(n, dtype=np.int64), dep_tick=np.full(n, -1, dtype=np.int64),
        offsets=offsets, _work=work,
    )


@numba.njit(cache=True)
def _advance(sig, visited, occ, kind, xs, ys, wealth, ica, age, alive, dep_cause, dep_tick,
             offsets, alpha, keep, threshold, retirement, tick, rng,
             order, csig, cvis, cocc, cpos, flags, scratch, out):
    height, width = sig.shape
    m = 0
    for i in range(kind.shape[0]):
        if alive[i]:
            order[m] = i
            m += 1
    for i in range(m - 1, 0, -1):
        j = rng.integers(0, i + 1)
        t = order[i]
        order[i] = order[j]
        order[j] = t

    extracted = 0.0
    for oi in range(m):
        a = order[oi]
        px = xs[a]
        py = ys[a]
        n = 0
        for r in range(offsets.shape[0]):
            qx = px + offsets[r, 0]
            qy = py + offsets[r, 1]
            if qx < 0 or qx >= width or qy < 0 or qy >= height:
                continue
            csig[n] = sig[qy, qx]
            cvis[n] = visited[qy, qx]
            cocc[n] = occ[qy, qx] > 0
            cpos[n, 0] = qx
            cpos[n, 1] = qy
            n += 1
        c = choose_index(kind[a], sig[py, px], csig, cvis, cocc, n, rng, flags, scratch)
        if c >= 0:
            if occ[py, px] < 1:
                out[1] = a
                return 1
            occ[py, px] -= 1
            px = cpos[c, 0]
            py = cpos[c, 1]
            occ[py, px] += 1
            visited[py, px] = True
            xs[a] = px
            ys[a] = py
        gain = alpha * sig[py, px]
        sig[py, px] -= gain
        wealth[a] += gain
        ica[a] += gain
        extracted += gain

    for oi in range(m):
        a = order[oi]
        wealth[a] = wealth[a] * keep
        age[a] += 1
    for a in range(kind.shape[0]):
        if not alive[a] or dep_cause[a] != 0:
            continue
        if wealth[a] < threshold:
            dep_cause[a] = 1
        elif age[a] >= retirement:
            dep_cause[a] = 2
        else:
            continue
        dep_tick[a] = tick
        alive[a] = False
        if occ[ys[a], xs[a]] < 1:
            out[1] = a
            return 1
        occ[ys[a], xs[a]] -= 1
    out[0] = extracted
    return 0


def step(state: SimState) -> TickReport:
    """Advance one tick and return its census."""
    cfg = state.config
    if state.tick >= cfg.max_ticks:
        raise InvariantError(f"no ticks remaining (max_ticks={cfg.max_ticks})")
    ls = state.landscape
    tick = state.tick + 1
    before = state.dep_cause.copy()
    out = np.zeros(2)
    status = _advance(ls.significance, ls.visited, ls.occupancy, state.kind, state.x, state.y,
                      state.wealth, state.ica, state.age, state.alive, state.dep_cause,
                      state.dep_tick, state.offsets, float(cfg.kdr), 1.0 - float(cfg.metabolism_rate),
                      float(cfg.survival_threshold), int(cfg.retirement_age), tick, state.rng,
                      *state._work, out)
    if status != 0:
        agent = int(out[1])
        raise InvariantError(
            f"occupancy underflow for agent {agent} at tick {tick}",
            {"tick": tick, "agent": agent, "pos": (int(state.x[agent]), int(state.y[agent])),
             "occupancy_total": int(ls.occupancy.sum()), "alive": state.n_alive},
        )
    state.tick = tick
    state.extracted += float(out[0])
    new = np.flatnonzero(state.dep_cause != before)
    departures = [(int(i), CAUSE_NAMES[int(state.dep_cause[i])]) for i in new]
    if int(ls.occupancy.sum()) != state.n_alive:
        raise InvariantError(f"occupancy total {int(ls.occupancy.sum())} != living agents "
                             f"{state.n_alive} at tick {tick}", {"tick": tick})
    return state.report(departures)


def _ica_by_kind(agents: list[Agent]) -> dict[str, list[float]]:
    out: dict[str, list[float]] = {k.value: [] for k in KINDS}
    for a in agents:
        out[a.kind.value].append(a.ica)
    return out


def run(config: SimConfig, snapshot_ticks: Iterable[int] = ()) -> RunResult:
    """Run ``config`` to completion; the result depends on ``config`` alone.

    ``snapshot_ticks`` selects ticks whose significance grid is copied into
    ``RunResult.snapshots`` (tick 0 is the state after spawning).
    """
    state = init_sim(config)
    initial_max = float(state.landscape.significance.max())
    wanted = set(int(t) for t in snapshot_ticks)
    snaps = {}
    if 0 in wanted:
        snaps[0] = state.landscape.significance.copy()
    ticks = [state.report()]
    while state.tick < config.max_ticks and state.n_alive > 0:
        ticks.append(step(state))
        if state.tick in wanted:
            snaps[state.tick] = state.landscape.significance.copy()
    agents = state.agents()
    final_total = total_significance(state.landscape)
    if not math.isfinite(final_total):
        raise InvariantError("non-finite landscape total", {"tick": state.tick})
    return RunResult(
        config=config, ticks=ticks, agents_final=agents, ica_by_kind=_ica_by_kind(agents),
        initial_total=state.landscape.initial_total, landscape_final_total=final_total,
        initial_max=initial_max, snapshots=snaps,
    )
