"""Movement rules for the four scholar strategies.

Every rule tree is implemented once, in :func:`choose_index`, a numba kernel
over flat candidate arrays. The engine calls it directly from its tick loop;
:func:`decide` wraps it for callers holding a :class:`WorldView`. Both paths
consume the same ``numpy.random.Generator`` stream in the same way.

"Higher significance" always means strictly greater than the agent's current
patch. Every random pick is ``rng.integers(0, k)`` over the qualifying
candidates in row-major order; nothing is drawn when a rule stays put.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence, Union

import numba
import numpy as np

from .errors import ConfigError
from .landscape import Position


class StrategyKind(enum.Enum):
    EXPERT = "expert"
    FOLLOWER = "follower"
    MAVERICK = "maverick"
    CONSERVATIVE = "conservative"

    @property
    def code(self) -> int:
        return _CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "StrategyKind":
        return KINDS[code]

    @classmethod
    def parse(cls, value: Union[str, "StrategyKind"]) -> "StrategyKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown strategy kind {value!r}; expected one of "
                              f"{[k.value for k in cls]}") from None


KINDS = tuple(StrategyKind)
_CODES = {k: i for i, k in enumerate(KINDS)}

EXPERT, FOLLOWER, MAVERICK, CONSERVATIVE = 0, 1, 2, 3


@dataclass(frozen=True)
class PatchView:
    pos: Position
    significance: float
    visited: bool
    occupied_by_others: bool


@dataclass(frozen=True)
class WorldView:
    current: PatchView
    candidates: tuple[PatchView, ...]


@dataclass(frozen=True)
class Stay:
    pass


@dataclass(frozen=True)
class MoveTo:
    pos: Position


Decision = Union[Stay, MoveTo]
STAY = Stay()


@numba.njit(cache=True)
def _pick(rng, flags, n, scratch):
    # uniform choice among the indices i < n with flags[i] set
    k = 0
    for i in range(n):
        if flags[i]:
            scratch[k] = i
            k += 1
    if k == 0:
        return -1
    return scratch[rng.integers(0, k)]


@numba.njit(cache=True)
def choose_index(kind, current_sig, sig, visited, occupied, n, rng, flags, scratch):
    """Index of the chosen candidate among the first ``n``, or -1 to stay.

    ``flags`` and ``scratch`` are work buffers of length >= n.
    """
    if n == 0:
        return -1

    if kind == EXPERT:
        best = current_sig
        for i in range(n):
            if sig[i] > best:
                best = sig[i]
        if not best > current_sig:
            return -1
        for i in range(n):
            flags[i] = sig[i] == best
        return _pick(rng, flags, n, scratch)

    if kind == MAVERICK:
        any_new = False
        for i in range(n):
            flags[i] = not visited[i]
            any_new = any_new or flags[i]
        if any_new:
            return _pick(rng, flags, n, scratch)
        for i in range(n):
            flags[i] = sig[i] > current_sig
        return _pick(rng, flags, n, scratch)

    # followers key on current occupancy, conservatives on visit history
    if kind == FOLLOWER:
        marked = occupied
    else:
        marked = visited
    any_marked = False
    for i in range(n):
        if marked[i]:
            any_marked = True
            break
    if not any_marked:
        for i in range(n):
            flags[i] = True
        return _pick(rng, flags, n, scratch)
    any_higher = False
    for i in range(n):
        flags[i] = marked[i] and sig[i] > current_sig
        any_higher = any_higher or flags[i]
    if any_higher:
        return _pick(rng, flags, n, scratch)
    for i in range(n):
        flags[i] = not marked[i]
    return _pick(rng, flags, n, scratch)


def _view_arrays(view: WorldView):
    cands = view.candidates
    n = len(cands)
    sig = np.array([c.significance for c in cands], dtype=np.float64)
    visited = np.array([c.visited for c in cands], dtype=np.bool_)
    occupied = np.array([c.occupied_by_others for c in cands], dtype=np.bool_)
    return n, sig, visited, occupied


def decide(kind: StrategyKind | str, view: WorldView, rng: np.random.Generator) -> Decision:
    """Apply ``kind``'s movement rule to ``view``, drawing ties from ``rng``."""
    kind = StrategyKind.parse(kind)
    n, sig, visited, occupied = _view_arrays(view)
    if n == 0:
        return STAY
    idx = choose_index(kind.code, float(view.current.significance), sig, visited, occupied,
                       n, rng, np.zeros(n, np.bool_), np.zeros(n, np.int64))
    if idx < 0:
        return STAY
    return MoveTo(view.candidates[idx].pos)


def decide_expert(view: WorldView, rng: np.random.Generator) -> Decision:
    return decide(StrategyKind.EXPERT, view, rng)


def decide_follower(view: WorldView, rng: np.random.Generator) -> Decision:
    return decide(StrategyKind.FOLLOWER, view, rng)


def decide_maverick(view: WorldView, rng: np.random.Generator) -> Decision:
    return decide(StrategyKind.MAVERICK, view, rng)


def decide_conservative(view: WorldView, rng: np.random.Generator) -> Decision:
    return decide(StrategyKind.CONSERVATIVE, view, rng)


def make_view(current: tuple, candidates: Sequence[tuple]) -> WorldView:
    """Build a WorldView from ``(pos, significance, visited, occupied)`` tuples."""
    def pv(t):
        pos, s, v, o = t
        return PatchView(Position(*pos), float(s), bool(v), bool(o))

    return WorldView(pv(current), tuple(pv(c) for c in candidates))
