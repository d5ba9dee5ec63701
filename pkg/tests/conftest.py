import itertools

import numpy as np
import pytest

from axlab.core import Histogram, n_rankings


def brute_margins(votes, m):
    """Margin matrix by direct pair counting over a vote list."""
    g = np.zeros((m, m), dtype=int)
    for v in votes:
        for a, b in itertools.permutations(range(1, m + 1), 2):
            if v.index(a) < v.index(b):
                g[a - 1, b - 1] += 1
                g[b - 1, a - 1] -= 1
    return g


def random_hist(rng, m, n):
    return Histogram(m, np.bincount(rng.integers(0, n_rankings(m), n), minlength=n_rankings(m)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
