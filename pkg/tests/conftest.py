import numpy as np
import pytest
from hypothesis import settings

from aliasfft import generate_test_case

settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")


@pytest.fixture
def five_tone_n20():
    """20-point exact case with tones at {1, 3, 5, 10, 13}."""
    return generate_test_case(20, 5, "exact", seed=7, positions=[1, 3, 5, 10, 13])


@pytest.fixture
def five_tone_n64():
    """64-point exact case with tones at {1, 6, 13, 20, 59}."""
    return generate_test_case(64, 5, "exact", seed=11, positions=[1, 6, 13, 20, 59])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
