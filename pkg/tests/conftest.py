import numpy as np
import pytest

from hostforge.model import default_params


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20210901)
