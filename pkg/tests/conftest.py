import numpy as np
import pytest

from collective_decay import make_ensemble


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def pair(x, direction=(0.0, 0.0, 1.0), omega0=1000.0):
    d = np.asarray(direction, dtype=float)
    return make_ensemble([[0.0, 0.0, 0.0], list(x * d / np.linalg.norm(d))], omega0)
