import numpy as np
import pytest

from vireg import Grid, build_example


@pytest.fixture(scope="session")
def grid200():
    return Grid(200)


@pytest.fixture(scope="session")
def specs(grid200):
    return {name: build_example(name, grid200) for name in ("example1", "example2")}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
