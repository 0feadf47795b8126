"""Agent-based simulation of scholars choosing research topics on a depletable landscape."""

__version__ = "0.1.0"

from .engine import Agent, RunResult, SimConfig, TickReport, init_sim, run, step
from .errors import ConfigError, InvariantError, OutputError
from .experiments import ExperimentSpec, builtin_scenarios, run_sweep
from .landscape import GaussianSpec, Landscape, LandscapeConfig, Position, generate_landscape
from .metrics import MetricsSummary, gini, summarize
from .strategy import Decision, MoveTo, PatchView, Stay, StrategyKind, WorldView, decide

__all__ = [
    "Agent", "ConfigError", "Decision", "ExperimentSpec", "GaussianSpec", "InvariantError", "Landscape",
    "LandscapeConfig", "MetricsSummary", "MoveTo", "OutputError", "PatchView", "Position", "RunResult", "SimConfig",
    "Stay", "StrategyKind", "TickReport", "WorldView", "builtin_scenarios", "decide",
    "generate_landscape", "gini", "init_sim", "run", "run_sweep", "step", "summarize",
]
