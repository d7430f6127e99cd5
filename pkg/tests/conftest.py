from __future__ import annotations

import numpy as np
import pytest

from persistnet.correlation import CorrelationLayer


def make_layer(n: int, seed: int, anchor: int = 0) -> CorrelationLayer:
    """Random symmetric unit-diagonal matrix with entries in [-1, 1]."""
    rng = np.random.default_rng(seed)
    m = rng.uniform(-1.0, 1.0, size=(n, n))
    m = 0.5 * (m + m.T)
    np.fill_diagonal(m, 1.0)
    return CorrelationLayer(anchor=anchor, matrix=m)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
