import numpy as np
import pytest

from beamadhesion import BeamParams, Grid


@pytest.fixture
def unit_params():
    return BeamParams(rho=1.0, mu=1.0, length=1.0)


@pytest.fixture
def small_grid():
    return Grid(41, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
