import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("suite", max_examples=25, deadline=None)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def digit_target():
    """A 32x32 digit field with content away from the borders."""
    from facl.datagen import synthetic_digit_corpus

    target = np.zeros((32, 32))
    target[2:30, 2:30] = synthetic_digit_corpus(1, seed=7)[0]
    return target
