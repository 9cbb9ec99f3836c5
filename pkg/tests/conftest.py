import numpy as np
import pytest


def central_difference_gradient(func, point, step=1e-5):
    """Independent gradient oracle: symmetric differences coordinate by coordinate."""
    point = np.asarray(point, dtype=float)
    grad = np.zeros_like(point)
    for j in range(point.size):
        e = np.zeros_like(point)
        e[j] = step
        grad[j] = (func(point + e) - func(point - e)) / (2.0 * step)
    return grad


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
