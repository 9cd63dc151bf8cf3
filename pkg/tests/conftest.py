import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from market_sim.config import preset, with_overrides  # noqa: E402
from market_sim.initializer import init_simulation  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-scale acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def small_config():
    """A-small shortened so a full run takes well under a second."""
    return with_overrides(preset("A-small"), rounds=600, log_every=0)


@pytest.fixture
def tiny_config():
    return with_overrides(preset("A-small"), n=16, rounds=120, tau=5, log_every=0)


@pytest.fixture
def tiny_state(tiny_config):
    return init_simulation(tiny_config)
