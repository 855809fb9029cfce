import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def iid_signs(rng, n: int) -> np.ndarray:
    return ((rng.integers(0, 2, size=n, dtype=np.int8) << 1) - 1).astype(np.int8)
