import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_blobs(n=60, m=2, seed=0, spread=0.05):
    """Two tight, far-apart nonnegative clusters (column instances)."""
    rng = np.random.default_rng(seed)
    half = n // 2
    a = np.array([[0.1], [0.9]])[:m] + spread * rng.standard_normal((m, half))
    b = np.array([[0.9], [0.1]])[:m] + spread * rng.standard_normal((m, n - half))
    X = np.clip(np.hstack([a, b]), 0.0, None)
    labels = np.repeat([0, 1], [half, n - half])
    return X, labels


@pytest.fixture
def blobs():
    return make_blobs()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
