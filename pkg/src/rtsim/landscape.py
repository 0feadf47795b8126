"""The scientific landscape: a depletable significance height field on a grid.

Arrays are stored row-major with shape ``(height, width)`` and indexed
``[y, x]``. Positions are ``(x, y)`` pairs. Edges are hard; nothing wraps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigError, InvariantError

VISION_METRICS = ("chebyshev", "euclidean")


class Position(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class GaussianSpec:
    center: tuple[float, float]
    amplitude: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not self.amplitude >= 0:
            raise ConfigError(f"gaussian amplitude must be >= 0, got {self.amplitude}")
        if not self.sigma > 0:
            raise ConfigError(f"gaussian sigma must be > 0, got {self.sigma}")

    def to_dict(self) -> dict:
        return {"center": list(self.center), "amplitude": self.amplitude, "sigma": self.sigma}

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianSpec":
        try:
            return cls(center=tuple(d["center"]), amplitude=float(d["amplitude"]),
                       sigma=float(d["sigma"]))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad gaussian spec {d!r}: {exc}") from None


DEFAULT_GAUSSIANS = (
    GaussianSpec(center=(15.0, 15.0), amplitude=10.0, sigma=6.0),
    GaussianSpec(center=(35.0, 35.0), amplitude=8.0, sigma=8.0),
)


@dataclass(frozen=True)
class LandscapeConfig:
    width: int = 50
    height: int = 50
    gaussians: tuple[GaussianSpec, ...] = DEFAULT_GAUSSIANS
    noise_amplitude: float = 0.2
    landscape_seed: int = 0
    vision_metric: str = "chebyshev"

    def __post_init__(self):
        object.__setattr__(self, "gaussians", tuple(self.gaussians))
        if not (isinstance(self.width, (int, np.integer)) and self.width >= 1):
            raise ConfigError(f"width must be a positive integer, got {self.width!r}")
        if not (isinstance(self.height, (int, np.integer)) and self.height >= 1):
            raise ConfigError(f"height must be a positive integer, got {self.height!r}")
        if not self.noise_amplitude >= 0:
            raise ConfigError(f"noise_amplitude must be >= 0, got {self.noise_amplitude}")
        if not 0 <= self.landscape_seed < 2**64:
            raise ConfigError(f"landscape_seed must fit in 64 unsigned bits, got {self.landscape_seed}")
        if self.vision_metric not in VISION_METRICS:
            raise ConfigError(f"vision_metric must be one of {VISION_METRICS}, got {self.vision_metric!r}")

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "gaussians": [g.to_dict() for g in self.gaussians],
            "noise_amplitude": self.noise_amplitude,
            "landscape_seed": self.landscape_seed,
            "vision_metric": self.vision_metric,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LandscapeConfig":
        known = {"width", "height", "gaussians", "noise_amplitude", "landscape_seed", "vision_metric"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown landscape keys: {sorted(unknown)}")
        kw = dict(d)
        if "gaussians" in kw:
            kw["gaussians"] = tuple(GaussianSpec.from_dict(g) for g in kw["gaussians"])
        return cls(**kw)


@dataclass
class Landscape:
    config: LandscapeConfig
    significance: np.ndarray
    visited: np.ndarray
    occupancy: np.ndarray
    initial_total: float = field(init=False)

    def __post_init__(self):
        self.initial_total = float(self.significance.sum())

    @property
    def shape(self) -> tuple[int, int]:
        return self.significance.shape

    def in_bounds(self, pos: Position) -> bool:
        return 0 <= pos[0] < self.config.width and 0 <= pos[1] < self.config.height

    def height_at(self, pos: Position) -> float:
        return float(self.significance[pos[1], pos[0]])


def gaussian_field(config: LandscapeConfig) -> np.ndarray:
    """Noise-free sum of the configured Gaussians, shape (height, width)."""
    ys, xs = np.mgrid[0:config.height, 0:config.width].astype(np.float64)
    h = np.zeros((config.height, config.width), dtype=np.float64)
    for g in config.gaussians:
        cx, cy = g.center
        d2 = (xs - cx) ** 2 + (ys - cy) ** 2
        h += g.amplitude * np.exp(-d2 / (2.0 * g.sigma ** 2))
    return h


def generate_landscape(config: LandscapeConfig) -> Landscape:
    h = gaussian_field(config)
    if config.noise_amplitude > 0:
        rng = np.random.default_rng(config.landscape_seed)
        # filled in row-major order: (0,0), (1,0), ... (w-1,0), (0,1), ...
        h += rng.uniform(-config.noise_amplitude, config.noise_amplitude, size=h.shape)
    np.maximum(h, 0.0, out=h)
    return Landscape(
        config=config,
        significance=h,
        visited=np.zeros(h.shape, dtype=np.bool_),
        occupancy=np.zeros(h.shape, dtype=np.int64),
    )


def vision_offsets(vision: int, metric: str = "chebyshev") -> np.ndarray:
    """(dx, dy) offsets within ``vision`` of the origin, origin excluded, row-major.

    Returns an int64 array of shape (k, 2).
    """
    if vision < 1:
        raise ConfigError(f"vision must be >= 1, got {vision}")
    if metric not in VISION_METRICS:
        raise ConfigError(f"unknown vision metric {metric!r}")
    out = []
    for dy in range(-vision, vision + 1):
        for dx in range(-vision, vision + 1):
            if dx == 0 and dy == 0:
                continue
            if metric == "euclidean" and dx * dx + dy * dy > vision * vision:
                continue
            out.append((dx, dy))
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def neighborhood(landscape: Landscape, pos: Position, vision: int) -> list[Position]:
    """In-bounds patches within ``vision`` of ``pos`` (own patch excluded), row-major."""
    w, h = landscape.config.width, landscape.config.height
    px, py = pos
    out = []
    for dx, dy in vision_offsets(vision, landscape.config.vision_metric):
        qx, qy = px + int(dx), py + int(dy)
        if 0 <= qx < w and 0 <= qy < h:
            out.append(Position(qx, qy))
    return out


def extract(landscape: Landscape, pos: Position, alpha: float) -> float:
    """Take ``alpha`` of the patch's remaining significance and return it."""
    x, y = pos
    gain = alpha * landscape.significance[y, x]
    landscape.significance[y, x] -= gain
    return float(gain)


def mark_visited(landscape: Landscape, pos: Position) -> None:
    landscape.visited[pos[1], pos[0]] = True


def adjust_occupancy(landscape: Landscape, from_: Optional[Position] = None,
                     to: Optional[Position] = None) -> None:
    """Move one agent's occupancy from ``from_`` to ``to``; either may be None."""
    if from_ is not None:
        x, y = from_
        if landscape.occupancy[y, x] < 1:
            raise InvariantError(f"occupancy underflow at {tuple(from_)}",
                                 {"pos": tuple(from_), "occupancy": int(landscape.occupancy[y, x])})
        landscape.occupancy[y, x] -= 1
    if to is not None:
        landscape.occupancy[to[1], to[0]] += 1


def total_significance(landscape: Landscape) -> float:
    return float(landscape.significance.sum())


def coverage_fraction(visited: np.ndarray) -> float:
    return float(np.count_nonzero(visited)) / visited.size


def pgm_bytes(significance: np.ndarray, h_max: float) -> bytes:
    """8-bit binary PGM (P5) with one pixel per patch, scaled by ``h_max``."""
    height, width = significance.shape
    if h_max > 0:
        pix = np.clip(np.rint(255.0 * significance / h_max), 0, 255).astype(np.uint8)
    else:
        pix = np.zeros(significance.shape, dtype=np.uint8)
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    return header + pix.tobytes()


def write_pgm(path: str | Path, significance: np.ndarray, h_max: float) -> Path:
    path = Path(path)
    path.write_bytes(pgm_bytes(significance, h_max))
    return path


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    # header is exactly the three lines written by pgm_bytes
    magic, dims, maxval, pixels = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError(f"{path}: not an 8-bit binary PGM")
    width, height = (int(v) for v in dims.split())
    return np.frombuffer(pixels[: width * height], dtype=np.uint8).reshape(height, width)

