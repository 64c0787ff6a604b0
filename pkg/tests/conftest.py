import numpy as np
import pytest

from ncqm.core import Grid2D


@pytest.fixture(scope="session")
def grid32():
    return Grid2D(32, 32, 8.0, 8.0)


@pytest.fixture(scope="session")
def grid48():
    return Grid2D(48, 48, 8.0, 8.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
