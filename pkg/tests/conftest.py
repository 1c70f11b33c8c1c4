import numpy as np
import pytest

from liecluster.coupling import clear_cache


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fresh_cache():
    clear_cache()
    yield
    clear_cache()


def rel_residual(a, b):
    """``max|a - b| / max(1, max|a|)``."""
    a, b = np.asarray(a), np.asarray(b)
    return float(np.abs(a - b).max(initial=0.0) / max(1.0, np.abs(a).max(initial=0.0)))
