"""Run-level invariant checks shared by the engine tests and the acceptance suite."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from rtsim.engine import SimConfig, init_sim, run, step
from rtsim.landscape import GaussianSpec, LandscapeConfig
from rtsim.strategy import KINDS


def random_config(rng: np.random.Generator) -> SimConfig:
    w, h = int(rng.integers(1, 31)), int(rng.integers(1, 31))
    gs = tuple(GaussianSpec((int(rng.integers(0, w)), int(rng.integers(0, h))),
                            float(rng.uniform(0, 15)), float(rng.uniform(0.5, 10)))
               for _ in range(int(rng.integers(0, 3))))
    land = LandscapeConfig(width=w, height=h, gaussians=gs,
                           noise_amplitude=float(rng.choice([0.0, rng.uniform(0, 2)])),
                           landscape_seed=int(rng.integers(0, 2**32)),
                           vision_metric=str(rng.choice(["chebyshev", "euclidean"])))
    counts = rng.integers(0, 16, size=4)
    if counts.sum() == 0:
        counts[int(rng.integers(0, 4))] = 1
    return SimConfig(
        landscape=land,
        population=tuple((k, int(c)) for k, c in zip(KINDS, counts)),
        vision=int(rng.integers(1, 6)),
        metabolism_rate=float(rng.choice([0.0, rng.uniform(0, 0.95)])),
        kdr=float(rng.uniform(0.01, 1.0)),
        retirement_age=int(rng.integers(1, 80)),
        initial_wealth=float(rng.uniform(0, 10)),
        survival_threshold=float(rng.uniform(0.01, 2)),
        max_ticks=int(rng.integers(0, 60)),
        run_seed=int(rng.integers(0, 2**63)),
    )


def check_run(config: SimConfig) -> list[str]:
    """Return a list of violated properties (empty when all hold)."""
    bad = []
    a, b = run(config), run(config)
    if a.to_json() != b.to_json() or a != b:
        bad.append("determinism")

    state = init_sim(config)
    keep = 1.0 - config.metabolism_rate
    prev_cov, prev_prog, prev_alive = -1.0, -1.0, None
    prev_surv = None
    while state.tick < config.max_ticks and state.n_alive > 0:
        x0, y0 = state.x.copy(), state.y.copy()
        w0, ica0, alive0, age0 = state.wealth.copy(), state.ica.copy(), state.alive.copy(), state.age.copy()
        rep = step(state)
        moved = np.maximum(np.abs(state.x - x0), np.abs(state.y - y0))
        if (moved[alive0] > config.vision).any():
            bad.append("movement bound")
        if (moved[~alive0] != 0).any() or (state.ica[~alive0] != ica0[~alive0]).any():
            bad.append("dead agents frozen")
        gain = state.ica - ica0
        if (gain < 0).any():
            bad.append("ica monotone")
        # gain recovered from ica is exact only up to one ulp of ica
        slack = 4 * np.finfo(float).eps * (state.ica + w0)
        if (np.abs(state.wealth - (w0 + gain) * keep)[alive0] > slack[alive0]).any():
            bad.append("wealth update")
        if (state.wealth < 0).any():
            bad.append("wealth floor")
        if (state.age[alive0] != age0[alive0] + 1).any() or (state.age > config.retirement_age).any():
            bad.append("age law")
        if (state.alive & ~alive0).any():
            bad.append("no resurrection")
        left = sorted(i for i, _ in rep.departures_this_tick)
        if left != sorted(np.flatnonzero(alive0 & ~state.alive).tolist()):
            bad.append("departure bookkeeping")
        if not prev_cov <= rep.coverage <= 1 or not prev_prog - 1e-12 <= rep.progress <= 1 + 1e-12:
            bad.append("monotone coverage/progress")
        if prev_surv is not None and any(rep.survivors_by_kind[k] > prev_surv[k] for k in prev_surv):
            bad.append("survivor monotonicity")
        prev_cov, prev_prog, prev_surv = rep.coverage, rep.progress, rep.survivors_by_kind

    if decay_closed_form(config):
        bad.append("decay closed form")

    depletion = a.initial_total - a.landscape_final_total
    total_ica = sum(x.ica for x in a.agents_final)
    if abs(depletion - total_ica) > 1e-6 * max(abs(depletion), 1e-300) and abs(depletion - total_ica) > 1e-12:
        bad.append("conservation")
    for ag in a.agents_final:
        if ag.alive == (ag.departure is not None):
            bad.append("single departure cause")
            break
    surv = [sum(t.survivors_by_kind.values()) for t in a.ticks]
    if any(s1 > s0 for s0, s1 in zip(surv, surv[1:])):
        bad.append("survivor monotonicity")
    return sorted(set(bad))


def decay_closed_form(config: SimConfig) -> bool:
    """On a barren landscape wealth must be exactly w0 * keep**k. True on violation."""
    barren = LandscapeConfig(width=config.landscape.width, height=config.landscape.height,
                             gaussians=(), noise_amplitude=0.0)
    state = init_sim(replace(config, landscape=barren))
    keep = 1.0 - config.metabolism_rate
    expect = float(config.initial_wealth)
    while state.tick < config.max_ticks and state.n_alive > 0:
        step(state)
        expect = expect * keep
        alive = state.alive
        if (state.wealth[alive] != expect).any() or (state.ica != 0).any():
            return True
        starved = state.dep_cause == 1
        if (state.wealth[starved] >= config.survival_threshold).any():
            return True
    return False
