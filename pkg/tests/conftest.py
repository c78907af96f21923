import numpy as np
import pytest

from citefit.dataset import CountDataset, truncate
from citefit.kernels import DiscreteDistribution


def sample_view(params, n, seed, x_min=1):
    """Truncated view over n draws from the given kernel."""
    dist = DiscreteDistribution(params, x_min)
    values = dist.sample(n, seed)
    return truncate(CountDataset(tuple(int(v) for v in values)), x_min)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240501)
