import numpy as np
import pytest
from hypothesis import settings

settings.register_profile('ordent', max_examples=200, deadline=None)
settings.load_profile('ordent')


def sort_oracle(window):
    """Stable-sort oracle: value descending, ties by index descending."""
    pairs = sorted(enumerate(window), key=lambda iv: (-iv[1], -iv[0]))
    return tuple(i for i, _ in pairs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
