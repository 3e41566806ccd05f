import numpy as np
import pytest

SQ2 = np.sqrt(2.0)
PSI_PLUS = np.array([0, 1, 1, 0], complex) / SQ2
PSI_MINUS = np.array([0, 1, -1, 0], complex) / SQ2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
