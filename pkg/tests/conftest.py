import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

DEFAULT_SEED = 20240611


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=DEFAULT_SEED,
                     help="seed for randomized property tests")


def pytest_configure(config):
    settings.register_profile("cyrank2", derandomize=True, deadline=None,
                              suppress_health_check=[HealthCheck.too_slow])
    settings.load_profile("cyrank2")


@pytest.fixture(scope="session")
def seed(request):
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed):
    import random

    return random.Random(seed)


@pytest.fixture(scope="session")
def table():
    from cyrank2.classifier import builtin_table

    return {r.no: r.sd for r in builtin_table()}


@pytest.fixture(scope="session")
def theorem_diff():
    """The default bounded search, run once per session."""
    from cyrank2.classifier import SearchConfig, reproduce_theorem

    return reproduce_theorem(SearchConfig())
