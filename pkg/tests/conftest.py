import numpy as np
import pytest

from spadesim import make_gaussian, make_sinc


@pytest.fixture(scope="session")
def gauss():
    return make_gaussian(1.0)


@pytest.fixture(scope="session")
def sinc():
    return make_sinc(1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(424242)
