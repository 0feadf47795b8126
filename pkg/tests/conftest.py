import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rtsim.engine import SimConfig  # noqa: E402
from rtsim.landscape import GaussianSpec, LandscapeConfig  # noqa: E402


@pytest.fixture
def flat_landscape():
    return LandscapeConfig(width=50, height=50, gaussians=(), noise_amplitude=0.0)


@pytest.fixture
def one_peak():
    return LandscapeConfig(gaussians=(GaussianSpec((25, 25), 10.0, 5.0),), noise_amplitude=0.0)


@pytest.fixture
def small_config():
    return SimConfig(landscape=LandscapeConfig(width=12, height=10), max_ticks=30,
                     population=(("expert", 6), ("follower", 6), ("maverick", 6), ("conservative", 6)))


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
