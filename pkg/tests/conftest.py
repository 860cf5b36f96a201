import dataclasses

import numpy as np
import pytest

from jointrisk.datagen import generate_dataset, scenario_grid
from jointrisk.numerics.rng import RngStream

# lines recorded by the acceptance module, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def base_config(rho, n=5000):
    cfg = next(c for c in scenario_grid(("base",)) if c.rho == rho)
    return dataclasses.replace(cfg, n=n)


@pytest.fixture(scope="session")
def make_data():
    """``make_data(rho, n, seed)`` -> SyntheticDataset, cached per session."""
    cache = {}

    def make(rho, n=5000, seed=1):
        key = (rho, n, seed)
        if key not in cache:
            cache[key] = generate_dataset(base_config(rho, n), RngStream(seed).child("tests"))
        return cache[key]

    return make


@pytest.fixture
def gen():
    return np.random.default_rng(12345)
