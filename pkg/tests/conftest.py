"""
Shared fixtures: seeded generators and synthetic 3DGS clouds.
"""
import numpy as np
import pytest

from tests.helpers import make_cloud, make_config


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_cloud():
    return make_cloud(500)


@pytest.fixture
def fast_config():
    return make_config()
