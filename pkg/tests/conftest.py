import os

# keep test runs from writing log files
os.environ.setdefault("ONEBIT_ISAC_LOG_DIR", "")

import numpy as np
import pytest

from tools.distributions import build_fading_grid
from tools.quantized_channel import ChannelParams


@pytest.fixture(scope="session")
def grid():
    return build_fading_grid(64, 64)


@pytest.fixture(scope="session")
def fine_grid():
    return build_fading_grid(128, 128)


@pytest.fixture(scope="session")
def coarse_grid():
    return build_fading_grid(16, 16)


@pytest.fixture
def params():
    return ChannelParams(sigma_c_sq=1.0, sigma_s_sq=1.0, power_budget=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


