import numpy as np
import pytest

from horses import Dataset, standardize


def random_standardized(seed, n=20, p=5):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    y = x @ rng.standard_normal(p) + rng.standard_normal(n)
    return standardize(x, y)[0]


@pytest.fixture
def small_dataset():
    return random_standardized(123, 20, 5)


@pytest.fixture
def orthonormal_dataset():
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.standard_normal((12, 4)))
    y = rng.standard_normal(12)
    return Dataset(q, y)
