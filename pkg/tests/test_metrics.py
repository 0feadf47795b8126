import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import gini_double_sum
from rtsim.engine import SimConfig, run
from rtsim.landscape import LandscapeConfig, generate_landscape
from rtsim.metrics import coverage, gini, histogram, ica_distribution, progress, summarize, survival_curve
from rtsim.strategy import KINDS

values = st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=60)


def test_progress_examples():
    assert progress(1000, 1000) == 0.0
    assert progress(1000, 900) == pytest.approx(0.1)
    assert progress(0, 0) == 0.0


def test_coverage_fresh_landscape():
    assert coverage(generate_landscape(LandscapeConfig())) == 0.0


def test_coverage_after_spawn_bounded():
    r = run(SimConfig(max_ticks=0))
    assert 0 < r.ticks[0].coverage <= 200 / 2500


def test_immobile_agent_covers_one_patch():
    # an expert on a barren landscape never sees a higher patch
    barren = LandscapeConfig(gaussians=(), noise_amplitude=0.0)
    r = run(SimConfig(landscape=barren, population=(("expert", 1),), metabolism_rate=0.0,
                      survival_threshold=0.01, max_ticks=100, retirement_age=200))
    assert r.ticks[-1].coverage == 1 / 2500


def test_gini_examples():
    assert gini([5, 5, 5, 5]) == 0.0
    assert gini([0, 0, 0, 10]) == pytest.approx(0.75)
    assert gini_double_sum([0, 0, 0, 10]) == pytest.approx(0.75)
    assert gini([0, 0]) == 0.0
    assert gini([3.0]) == 0.0


def test_gini_rejects_bad_input():
    with pytest.raises(ValueError):
        gini([])
    with pytest.raises(ValueError):
        gini([1.0, -1.0])


@settings(max_examples=300, deadline=None)
@given(v=values)
def test_gini_matches_double_sum(v):
    assert gini(v) == pytest.approx(gini_double_sum(v), rel=1e-9, abs=1e-12)
    assert 0.0 <= gini(v) <= 1.0


@settings(max_examples=200, deadline=None)
@given(v=values, c=st.floats(1e-3, 1e3), seed=st.integers(0, 1000))
def test_gini_scale_and_permutation_invariant(v, c, seed):
    perm = list(np.random.default_rng(seed).permutation(v))
    assert gini([c * x for x in v]) == pytest.approx(gini(v), rel=1e-9, abs=1e-12)
    assert gini(perm) == pytest.approx(gini(v), rel=1e-12, abs=1e-15)


@given(x=st.floats(1e-6, 1e6), n=st.integers(1, 50))
def test_gini_constant_list_is_zero(x, n):
    assert gini([x] * n) == pytest.approx(0.0, abs=1e-12)


def test_histogram_edges():
    counts, edges = histogram([0.0, 1.0, 2.0, 10.0], bins=20)
    assert len(counts) == 20 and len(edges) == 21
    assert edges[0] == 0.0 and edges[-1] == 10.0
    assert sum(counts) == 4
    counts, edges = histogram([0.0, 0.0], bins=20)
    assert sum(counts) == 2 and edges[-1] == 1.0


@pytest.fixture(scope="module")
def default_result():
    return run(SimConfig(run_seed=11))


def test_ica_distribution_in_id_order(default_result):
    for k in KINDS:
        vals = ica_distribution(default_result.agents_final, k)
        assert len(vals) == 50
        assert vals == [a.ica for a in default_result.agents_final if a.kind is k]
        assert vals == default_result.ica_by_kind[k.value]


def test_progress_matches_total_ica(default_result):
    r = default_result
    total = sum(a.ica for a in r.agents_final)
    assert r.ticks[-1].progress == pytest.approx(total / r.initial_total, rel=1e-6)


def test_progress_and_coverage_monotone(default_result):
    cov = [t.coverage for t in default_result.ticks]
    prog = [t.progress for t in default_result.ticks]
    assert cov == sorted(cov) and all(0 <= c <= 1 for c in cov)
    assert all(b >= a - 1e-12 for a, b in zip(prog, prog[1:]))


def test_survival_curves(default_result):
    for k in KINDS:
        curve = survival_curve(default_result, k)
        assert len(curve) == 101 and curve[0] == 50
        assert all(b <= a for a, b in zip(curve, curve[1:]))


def test_survival_curve_no_metabolism_is_a_cliff():
    r = run(SimConfig(metabolism_rate=0.0, survival_threshold=0.01, retirement_age=60))
    curve = survival_curve(r, "maverick")
    assert curve == [50] * 60 + [0] * 41


def test_survival_curve_barren_step():
    barren = LandscapeConfig(gaussians=(), noise_amplitude=0.0)
    r = run(SimConfig(landscape=barren, population=(("follower", 7),), initial_wealth=10.0,
                      metabolism_rate=0.2, survival_threshold=1.0))
    assert survival_curve(r, "follower") == [7] * 11 + [0] * 90


def test_summary(default_result):
    s = summarize(default_result)
    assert s.progress == default_result.ticks[-1].progress
    assert s.coverage == default_result.ticks[-1].coverage
    for k in KINDS:
        v = s.ica_values_by_kind[k.value]
        assert s.mean_ica_by_kind[k.value] == pytest.approx(np.mean(v))
        assert s.gini_by_kind[k.value] == pytest.approx(gini_double_sum(v), rel=1e-9)
        assert s.count_by_kind[k.value] == 50
        assert s.starved_by_kind[k.value] + s.retired_by_kind[k.value] + s.survivors_final(k.value) == 50


def test_summary_absent_kind_serializes():
    r = run(SimConfig(population=(("expert", 5),), max_ticks=3))
    d = summarize(r).to_dict()
    assert d["gini_by_kind"]["maverick"] is None
    assert d["count_by_kind"]["maverick"] == 0
