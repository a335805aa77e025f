import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_antisymmetric(rng, dim):
    a = rng.normal(size=(dim, dim))
    return a - a.T
