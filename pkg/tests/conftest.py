import numpy as np
import pytest

from modelsets import LossMatrix


def random_loss_matrix(rng: np.random.Generator, max_t: int = 40, max_m: int = 6) -> LossMatrix:
    t = int(rng.integers(2, max_t + 1))
    m = int(rng.integers(1, max_m + 1))
    values = rng.uniform(0.0, 2.0, size=(t, m))
    return LossMatrix(values, [f"m{j}" for j in range(1, m + 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
