import numpy as np
import pytest
from hypothesis import settings

from wgnlab.grid import build_grid, corpus

# fixed example generation keeps the recorded test output reproducible
settings.register_profile("reproducible", derandomize=True)
settings.load_profile("reproducible")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def grid1():
    return build_grid(1, 16.0, 128)


@pytest.fixture(scope="session")
def zm1():
    g = build_grid(1, 10.0, 256)
    return corpus(g, "zero-moment")


@pytest.fixture(scope="session")
def zm2():
    g = build_grid(2, 10.0, 64)
    return corpus(g, "zero-moment")
